//! Polyhedral subsets of Z^k: finite unions of conjunctions of integer
//! linear equalities, congruences and strict inequalities, with boolean
//! operations, products, affine images/preimages, and projection via
//! Cooper-style integer quantifier elimination. Also the supporting
//! integer-lattice algebra (Hermite normal form, Diophantine solving,
//! lattice coset membership).

use crate::{Error, Result};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

pub type Int = BigInt;

fn int(v: i64) -> Int {
    Int::from(v)
}

/// One elementary constraint over Z^k.
///
/// `Eq`: u·z = a; `Cong`: u·z ≡ a (mod b) with 0 ≤ a < b, b ≥ 2;
/// `Gt`: u·z > a.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind")]
pub enum Constraint {
    Eq { u: Vec<Int>, a: Int },
    Cong { u: Vec<Int>, a: Int, b: Int },
    Gt { u: Vec<Int>, a: Int },
}

enum Canon {
    True,
    False,
    Keep(Constraint),
}

fn content(u: &[Int]) -> Int {
    let mut g = Int::zero();
    for c in u {
        g = g.gcd(c);
    }
    g
}

fn first_nonzero_negative(u: &[Int]) -> bool {
    u.iter().find(|c| !c.is_zero()).map_or(false, |c| c.is_negative())
}

fn canonicalize(c: Constraint) -> Canon {
    match c {
        Constraint::Eq { mut u, mut a } => {
            let g = content(&u);
            if g.is_zero() {
                return if a.is_zero() { Canon::True } else { Canon::False };
            }
            if !(&a % &g).is_zero() {
                return Canon::False;
            }
            if !g.is_one() {
                for x in u.iter_mut() {
                    *x /= &g;
                }
                a /= &g;
            }
            if first_nonzero_negative(&u) {
                for x in u.iter_mut() {
                    *x = -std::mem::take(x);
                }
                a = -a;
            }
            Canon::Keep(Constraint::Eq { u, a })
        }
        Constraint::Gt { mut u, mut a } => {
            let g = content(&u);
            if g.is_zero() {
                return if a.is_negative() { Canon::True } else { Canon::False };
            }
            if !g.is_one() {
                for x in u.iter_mut() {
                    *x /= &g;
                }
                a = a.div_floor(&g);
            }
            Canon::Keep(Constraint::Gt { u, a })
        }
        Constraint::Cong { mut u, mut a, mut b } => {
            b = b.abs();
            if b <= Int::one() {
                return Canon::True;
            }
            for x in u.iter_mut() {
                *x = x.mod_floor(&b);
            }
            a = a.mod_floor(&b);
            if u.iter().all(|x| x.is_zero()) {
                return if a.is_zero() { Canon::True } else { Canon::False };
            }
            let g = content(&u).gcd(&b);
            if !g.is_one() {
                if !(&a % &g).is_zero() {
                    return Canon::False;
                }
                for x in u.iter_mut() {
                    *x /= &g;
                }
                a /= &g;
                b /= &g;
                if b.is_one() {
                    return Canon::True;
                }
                for x in u.iter_mut() {
                    *x = x.mod_floor(&b);
                }
                a = a.mod_floor(&b);
                if u.iter().all(|x| x.is_zero()) {
                    return if a.is_zero() { Canon::True } else { Canon::False };
                }
            }
            Canon::Keep(Constraint::Cong { u, a, b })
        }
    }
}

fn dot(u: &[Int], z: &[Int]) -> Int {
    u.iter().zip(z).map(|(a, b)| a * b).sum()
}

impl Constraint {
    fn dim(&self) -> usize {
        match self {
            Constraint::Eq { u, .. } | Constraint::Cong { u, .. } | Constraint::Gt { u, .. } => {
                u.len()
            }
        }
    }

    pub fn satisfied_by(&self, z: &[Int]) -> bool {
        match self {
            Constraint::Eq { u, a } => dot(u, z) == *a,
            Constraint::Gt { u, a } => dot(u, z) > *a,
            Constraint::Cong { u, a, b } => (dot(u, z) - a).mod_floor(b).is_zero(),
        }
    }

    /// The complement as a disjoint union of constraints.
    fn negate(&self) -> Vec<Constraint> {
        match self {
            Constraint::Eq { u, a } => vec![
                Constraint::Gt { u: u.clone(), a: a.clone() },
                Constraint::Gt {
                    u: u.iter().map(|x| -x).collect(),
                    a: -a,
                },
            ],
            Constraint::Gt { u, a } => vec![Constraint::Gt {
                u: u.iter().map(|x| -x).collect(),
                a: -a - 1,
            }],
            Constraint::Cong { u, a, b } => {
                let mut out = Vec::new();
                let mut c = Int::zero();
                while &c < b {
                    if c != *a {
                        out.push(Constraint::Cong { u: u.clone(), a: c.clone(), b: b.clone() });
                    }
                    c += 1;
                }
                out
            }
        }
    }
}

/// A finite conjunction of elementary constraints over Z^k. Canonical and
/// never syntactically contradictory (construction returns `None` when a
/// contradiction is detected).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicSet {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl BasicSet {
    /// Z^k (no constraints).
    pub fn universe(dim: usize) -> Self {
        BasicSet { dim, constraints: vec![] }
    }

    /// Canonicalize; `None` means the conjunction is provably empty.
    pub fn new(dim: usize, cs: Vec<Constraint>) -> Option<Self> {
        let mut out: BTreeSet<Constraint> = BTreeSet::new();
        for c in cs {
            debug_assert_eq!(c.dim(), dim, "constraint dimension mismatch");
            match canonicalize(c) {
                Canon::True => {}
                Canon::False => return None,
                Canon::Keep(c) => {
                    out.insert(c);
                }
            }
        }
        let bs = BasicSet { dim, constraints: out.into_iter().collect() };
        bs.simplify()
    }

    /// Local pairwise simplification: merges and contradiction checks among
    /// constraints sharing a direction vector. Sound (never changes the
    /// set), not complete.
    fn simplify(self) -> Option<Self> {
        use std::collections::BTreeMap;
        let dim = self.dim;
        // Key: sign-canonical direction. flip = true when the stored Gt row
        // uses the negated direction.
        type Key = Vec<Int>;
        fn canon_dir(u: &[Int]) -> (Key, bool) {
            if first_nonzero_negative(u) {
                (u.iter().map(|x| -x).collect(), true)
            } else {
                (u.to_vec(), false)
            }
        }
        let mut eqs: BTreeMap<Key, Int> = BTreeMap::new();
        let mut congs: BTreeMap<(Key, Int), Int> = BTreeMap::new();
        // lower: u·z > a (direction canonical); upper: u·z < a.
        let mut lower: BTreeMap<Key, Int> = BTreeMap::new();
        let mut upper: BTreeMap<Key, Int> = BTreeMap::new();
        for c in &self.constraints {
            match c {
                Constraint::Eq { u, a } => {
                    if let Some(prev) = eqs.insert(u.clone(), a.clone()) {
                        if prev != *a {
                            return None;
                        }
                    }
                }
                Constraint::Cong { u, a, b } => {
                    if let Some(prev) = congs.insert((u.clone(), b.clone()), a.clone()) {
                        if prev != *a {
                            return None;
                        }
                    }
                }
                Constraint::Gt { u, a } => {
                    let (key, flipped) = canon_dir(u);
                    if flipped {
                        // -key·z > a  <=>  key·z < -a
                        let e = upper.entry(key).or_insert_with(|| -a.clone());
                        if -a < *e {
                            *e = -a.clone();
                        }
                    } else {
                        let e = lower.entry(key).or_insert_with(|| a.clone());
                        if *a > *e {
                            *e = a.clone();
                        }
                    }
                }
            }
        }
        let mut out: Vec<Constraint> = Vec::new();
        for (u, a) in &eqs {
            // Equality decides any bound or congruence on the same direction.
            if let Some(l) = lower.remove(u) {
                if *a <= l {
                    return None;
                }
            }
            if let Some(h) = upper.remove(u) {
                if *a >= h {
                    return None;
                }
            }
            out.push(Constraint::Eq { u: u.clone(), a: a.clone() });
        }
        let mut derived_eqs: Vec<Constraint> = Vec::new();
        for (u, l) in &lower {
            if let Some(h) = upper.get(u) {
                // l < u·z < h over the integers.
                if h - l <= int(1) {
                    return None;
                }
                if h - l == int(2) {
                    derived_eqs.push(Constraint::Eq { u: u.clone(), a: l + 1 });
                    continue;
                }
            }
            out.push(Constraint::Gt { u: u.clone(), a: l.clone() });
        }
        for (u, h) in &upper {
            if lower.contains_key(u) {
                if let Some(l) = lower.get(u) {
                    if h - l == int(2) {
                        continue; // became an equality above
                    }
                }
            }
            out.push(Constraint::Gt { u: u.iter().map(|x| -x).collect(), a: -h.clone() });
        }
        for ((u, b), a) in &congs {
            if let Some(e) = eqs.get(u) {
                if !(e - a).mod_floor(b).is_zero() {
                    return None;
                }
                continue; // implied by the equality
            }
            out.push(Constraint::Cong { u: u.clone(), a: a.clone(), b: b.clone() });
        }
        if derived_eqs.is_empty() {
            out.sort();
            out.dedup();
            Some(BasicSet { dim, constraints: out })
        } else {
            out.extend(derived_eqs);
            BasicSet::new(dim, out)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, z: &[Int]) -> bool {
        debug_assert_eq!(z.len(), self.dim);
        self.constraints.iter().all(|c| c.satisfied_by(z))
    }

    fn intersect(&self, other: &BasicSet) -> Option<BasicSet> {
        debug_assert_eq!(self.dim, other.dim);
        let mut cs = self.constraints.clone();
        cs.extend(other.constraints.iter().cloned());
        BasicSet::new(self.dim, cs)
    }

    /// Syntactic subset test: self ⊆ other when every constraint of other
    /// appears in self. One-sided and sound.
    fn subset_of_syntactic(&self, other: &BasicSet) -> bool {
        other.constraints.iter().all(|c| self.constraints.contains(c))
    }
}

/// A finite union of basic sets over Z^k. The empty disjunct list is the
/// empty set; each dimension has its own distinct empty set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyhedralSet {
    dim: usize,
    disjuncts: Vec<BasicSet>,
}

impl PolyhedralSet {
    pub fn empty(dim: usize) -> Self {
        PolyhedralSet { dim, disjuncts: vec![] }
    }

    pub fn universe(dim: usize) -> Self {
        PolyhedralSet { dim, disjuncts: vec![BasicSet::universe(dim)] }
    }

    pub fn from_basic(bs: BasicSet) -> Self {
        PolyhedralSet { dim: bs.dim, disjuncts: vec![bs] }
    }

    pub fn from_constraints(dim: usize, cs: Vec<Constraint>) -> Self {
        match BasicSet::new(dim, cs) {
            Some(bs) => PolyhedralSet::from_basic(bs),
            None => PolyhedralSet::empty(dim),
        }
    }

    fn from_disjuncts(dim: usize, mut ds: Vec<BasicSet>) -> Self {
        ds.sort();
        ds.dedup();
        // Drop disjuncts syntactically subsumed by another.
        let mut keep: Vec<BasicSet> = Vec::with_capacity(ds.len());
        'outer: for (i, d) in ds.iter().enumerate() {
            for (j, other) in ds.iter().enumerate() {
                if i != j && d.subset_of_syntactic(other) {
                    // Tie (equal constraint sets) is impossible after dedup;
                    // strict subsumption drops d.
                    if !other.subset_of_syntactic(d) || j < i {
                        continue 'outer;
                    }
                }
            }
            keep.push(d.clone());
        }
        PolyhedralSet { dim, disjuncts: keep }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn disjuncts(&self) -> &[BasicSet] {
        &self.disjuncts
    }

    pub fn contains(&self, z: &[Int]) -> bool {
        self.disjuncts.iter().any(|d| d.contains(z))
    }

    pub fn contains_i64(&self, z: &[i64]) -> bool {
        let zz: Vec<Int> = z.iter().map(|&v| int(v)).collect();
        self.contains(&zz)
    }

    fn check_dim(&self, other: &PolyhedralSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!(
                "set dimensions {} and {} differ",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn union(&self, other: &PolyhedralSet) -> Result<PolyhedralSet> {
        self.check_dim(other)?;
        let mut ds = self.disjuncts.clone();
        ds.extend(other.disjuncts.iter().cloned());
        Ok(PolyhedralSet::from_disjuncts(self.dim, ds))
    }

    pub fn intersect(&self, other: &PolyhedralSet) -> Result<PolyhedralSet> {
        self.check_dim(other)?;
        let mut ds = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                if let Some(c) = a.intersect(b) {
                    ds.push(c);
                }
            }
        }
        Ok(PolyhedralSet::from_disjuncts(self.dim, ds))
    }

    /// Complement of one basic set as a union of pairwise disjoint basic
    /// sets (first-violated-constraint chaining).
    fn complement_basic(bs: &BasicSet) -> Vec<BasicSet> {
        let mut out = Vec::new();
        let mut prefix: Vec<Constraint> = Vec::new();
        for c in &bs.constraints {
            for neg in c.negate() {
                let mut cs = prefix.clone();
                cs.push(neg);
                if let Some(piece) = BasicSet::new(bs.dim, cs) {
                    out.push(piece);
                }
            }
            prefix.push(c.clone());
        }
        out
    }

    pub fn complement(&self) -> PolyhedralSet {
        PolyhedralSet::universe(self.dim)
            .difference(self)
            .expect("same dimension")
    }

    pub fn difference(&self, other: &PolyhedralSet) -> Result<PolyhedralSet> {
        self.check_dim(other)?;
        let mut acc: Vec<BasicSet> = self
            .disjuncts
            .iter()
            .filter(|d| !basic_surely_empty(d))
            .cloned()
            .collect();
        for d in &other.disjuncts {
            let pieces = Self::complement_basic(d);
            let mut next = Vec::new();
            for a in acc {
                // Disjoint disjuncts pass through unsplit.
                let meets = match a.intersect(d) {
                    None => false,
                    Some(ad) => !basic_surely_empty(&ad),
                };
                if !meets {
                    next.push(a);
                    continue;
                }
                for p in &pieces {
                    if let Some(ap) = a.intersect(p) {
                        if !basic_surely_empty(&ap) {
                            next.push(ap);
                        }
                    }
                }
            }
            acc = next;
            if acc.is_empty() {
                break;
            }
        }
        Ok(PolyhedralSet::from_disjuncts(self.dim, acc))
    }

    /// When the DNF grows past a threshold, drop disjuncts that full
    /// elimination proves empty.
    fn prune_empty_if_large(self) -> PolyhedralSet {
        if self.disjuncts.len() <= 16 {
            return self;
        }
        let ds: Vec<BasicSet> =
            self.disjuncts.into_iter().filter(|d| !basic_surely_empty(d)).collect();
        PolyhedralSet { dim: self.dim, disjuncts: ds }
    }

    /// Cartesian product: first the coordinates of self, then of other.
    pub fn product(&self, other: &PolyhedralSet) -> PolyhedralSet {
        let dim = self.dim + other.dim;
        let mut ds = Vec::new();
        for a in &self.disjuncts {
            for b in &other.disjuncts {
                let mut cs: Vec<Constraint> = Vec::new();
                for c in &a.constraints {
                    cs.push(pad_constraint(c, 0, dim));
                }
                for c in &b.constraints {
                    cs.push(pad_constraint(c, self.dim, dim));
                }
                if let Some(bs) = BasicSet::new(dim, cs) {
                    ds.push(bs);
                }
            }
        }
        PolyhedralSet::from_disjuncts(dim, ds)
    }

    /// Keep the coordinates listed in `keep` (strictly increasing),
    /// eliminating the others by integer quantifier elimination.
    pub fn project(&self, keep: &[usize]) -> PolyhedralSet {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(keep.iter().all(|&i| i < self.dim));
        let drop: Vec<usize> =
            (0..self.dim).filter(|i| !keep.contains(i)).collect();
        let mut cur = self.clone();
        // Eliminate from the highest index down so indices stay valid.
        for &j in drop.iter().rev() {
            let mut ds = Vec::new();
            for d in &cur.disjuncts {
                ds.extend(eliminate_var(d, j));
            }
            cur = PolyhedralSet::from_disjuncts(cur.dim - 1, ds).prune_empty_if_large();
        }
        cur
    }

    pub fn is_empty(&self) -> bool {
        self.disjuncts.iter().all(basic_is_empty)
    }

    /// Drop empty disjuncts and disjuncts semantically contained in
    /// another single disjunct. Quadratic, so worthwhile on small
    /// dimensions before an expensive difference or product.
    pub fn simplify(&self) -> PolyhedralSet {
        let ds: Vec<BasicSet> = self
            .disjuncts
            .iter()
            .filter(|d| !basic_surely_empty(d))
            .cloned()
            .collect();
        let subset = |a: &BasicSet, b: &BasicSet| -> bool {
            Self::complement_basic(b).iter().all(|piece| {
                a.intersect(piece).map_or(true, |c| basic_surely_empty(&c))
            })
        };
        let mut keep: Vec<BasicSet> = Vec::with_capacity(ds.len());
        'outer: for (i, d) in ds.iter().enumerate() {
            for (j, o) in ds.iter().enumerate() {
                if i == j {
                    continue;
                }
                if subset(d, o) && (j < i || !subset(o, d)) {
                    continue 'outer;
                }
            }
            keep.push(d.clone());
        }
        // In low dimension also drop disjuncts covered by the union of the
        // others: subtract the rest and keep only what survives.
        if self.dim <= 4 && keep.len() > 2 {
            let mut covered = vec![false; keep.len()];
            for i in 0..keep.len() {
                let rest = PolyhedralSet {
                    dim: self.dim,
                    disjuncts: keep
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i && !covered[*j])
                        .map(|(_, b)| b.clone())
                        .collect(),
                };
                let residue = PolyhedralSet::from_basic(keep[i].clone())
                    .difference(&rest)
                    .expect("same dimension");
                if residue.is_empty() {
                    covered[i] = true;
                }
            }
            keep = keep
                .into_iter()
                .zip(&covered)
                .filter(|(_, c)| !**c)
                .map(|(b, _)| b)
                .collect();
        }
        PolyhedralSet { dim: self.dim, disjuncts: keep }
    }

    /// Points of the set inside the box [-bound, bound]^k.
    pub fn enumerate_box(&self, bound: i64) -> Vec<Vec<Int>> {
        let mut out = Vec::new();
        let mut point = vec![0i64; self.dim];
        self.enum_rec(bound, 0, &mut point, &mut out);
        out
    }

    fn enum_rec(&self, bound: i64, idx: usize, point: &mut Vec<i64>, out: &mut Vec<Vec<Int>>) {
        if idx == self.dim {
            if self.contains_i64(point) {
                out.push(point.iter().map(|&v| int(v)).collect());
            }
            return;
        }
        for v in -bound..=bound {
            point[idx] = v;
            self.enum_rec(bound, idx + 1, point, out);
        }
    }

    /// Affine image {Ax + b : x in self}: graph construction plus
    /// projection onto the image coordinates.
    pub fn affine_image(&self, f: &AffineMap) -> Result<PolyhedralSet> {
        if f.input_dim() != self.dim {
            return Err(Error::DimMismatch(format!(
                "map input dimension {} vs set dimension {}",
                f.input_dim(),
                self.dim
            )));
        }
        let l = f.output_dim();
        let dim = self.dim + l;
        let mut ds = Vec::new();
        for d in &self.disjuncts {
            let mut cs: Vec<Constraint> = d
                .constraints
                .iter()
                .map(|c| pad_constraint(c, 0, dim))
                .collect();
            for i in 0..l {
                // y_i - A_i · x = b_i
                let mut u = vec![Int::zero(); dim];
                for j in 0..self.dim {
                    u[j] = -f.matrix[i][j].clone();
                }
                u[self.dim + i] = Int::one();
                cs.push(Constraint::Eq { u, a: f.offset[i].clone() });
            }
            if let Some(bs) = BasicSet::new(dim, cs) {
                ds.push(bs);
            }
        }
        let graph = PolyhedralSet::from_disjuncts(dim, ds);
        let keep: Vec<usize> = (self.dim..dim).collect();
        Ok(graph.project(&keep))
    }

    /// Affine preimage {y : Ay + b in self}, by substitution.
    pub fn affine_preimage(&self, f: &AffineMap) -> Result<PolyhedralSet> {
        if f.output_dim() != self.dim {
            return Err(Error::DimMismatch(format!(
                "map output dimension {} vs set dimension {}",
                f.output_dim(),
                self.dim
            )));
        }
        let l = f.input_dim();
        let mut ds = Vec::new();
        for d in &self.disjuncts {
            let mut cs = Vec::new();
            for c in &d.constraints {
                cs.push(substitute_affine(c, f, l));
            }
            if let Some(bs) = BasicSet::new(l, cs) {
                ds.push(bs);
            }
        }
        Ok(PolyhedralSet::from_disjuncts(l, ds))
    }

    /// Debug JSON description of the constraint system.
    pub fn debug_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "disjuncts": self.disjuncts.iter().map(|d| {
                serde_json::to_value(
                    d.constraints.iter().map(|c| {
                        serde_json::to_value(c).expect("constraint serializes")
                    }).collect::<Vec<_>>()
                ).expect("serializes")
            }).collect::<Vec<_>>(),
        })
    }
}

fn pad_constraint(c: &Constraint, offset: usize, dim: usize) -> Constraint {
    let pad = |u: &[Int]| {
        let mut v = vec![Int::zero(); dim];
        v[offset..offset + u.len()].clone_from_slice(u);
        v
    };
    match c {
        Constraint::Eq { u, a } => Constraint::Eq { u: pad(u), a: a.clone() },
        Constraint::Gt { u, a } => Constraint::Gt { u: pad(u), a: a.clone() },
        Constraint::Cong { u, a, b } => {
            Constraint::Cong { u: pad(u), a: a.clone(), b: b.clone() }
        }
    }
}

/// Substitute x = Ay + b into a constraint on x, yielding one on y.
fn substitute_affine(c: &Constraint, f: &AffineMap, l: usize) -> Constraint {
    let sub = |u: &[Int]| -> (Vec<Int>, Int) {
        let mut v = vec![Int::zero(); l];
        let mut shift = Int::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for j in 0..l {
                let t = &v[j] + ui * &f.matrix[i][j];
                v[j] = t;
            }
            shift += ui * &f.offset[i];
        }
        (v, shift)
    };
    match c {
        Constraint::Eq { u, a } => {
            let (v, s) = sub(u);
            Constraint::Eq { u: v, a: a - s }
        }
        Constraint::Gt { u, a } => {
            let (v, s) = sub(u);
            Constraint::Gt { u: v, a: a - s }
        }
        Constraint::Cong { u, a, b } => {
            let (v, s) = sub(u);
            Constraint::Cong { u: v, a: a - s, b: b.clone() }
        }
    }
}

fn basic_is_empty(bs: &BasicSet) -> bool {
    !basic_is_feasible(bs)
}

/// Depth-first satisfiability: probe the origin, then eliminate the
/// cheapest-looking variable and recurse, stopping at the first witness.
fn basic_is_feasible(bs: &BasicSet) -> bool {
    let mut budget = i64::MAX;
    feasible_with_budget(bs, &mut budget).expect("unbounded budget")
}

/// Bounded-effort emptiness: true only when the search proves emptiness
/// within the node budget. Callers use this where keeping a possibly
/// empty disjunct is sound, so running out of budget just means no
/// pruning. Adversarial congruence mixes can otherwise make full
/// elimination blow up exponentially.
fn basic_surely_empty(bs: &BasicSet) -> bool {
    let mut budget = 4_000i64;
    matches!(feasible_with_budget(bs, &mut budget), Some(false))
}

fn feasible_with_budget(bs: &BasicSet, budget: &mut i64) -> Option<bool> {
    if *budget <= 0 {
        return None;
    }
    *budget -= 1;
    if bs.dim == 0 {
        // Constant constraints were decided at construction.
        return Some(true);
    }
    if bs.contains(&vec![Int::zero(); bs.dim]) {
        return Some(true);
    }
    let j = pick_elimination_var(bs);
    let cap = u64::try_from(*budget).unwrap_or(u64::MAX);
    let branches = eliminate_var_capped(bs, j, cap)?;
    let mut unknown = false;
    for b in branches {
        match feasible_with_budget(&b, budget) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => unknown = true,
        }
    }
    if unknown {
        None
    } else {
        Some(false)
    }
}

/// Prefer a variable removable by equality substitution (one branch),
/// otherwise one with few Cooper branches: few lower bounds, unit
/// coefficients, no congruences.
fn pick_elimination_var(bs: &BasicSet) -> usize {
    let mut best = 0usize;
    let mut best_score: Option<(u64, u64)> = None;
    for j in 0..bs.dim {
        let mut in_eq: Option<u64> = None;
        let mut lowers = 0u64;
        let mut gts = 0u64;
        let mut congs = 0u64;
        let mut nonunit = 0u64;
        let mut appears = false;
        for c in &bs.constraints {
            let u = match c {
                Constraint::Eq { u, .. }
                | Constraint::Gt { u, .. }
                | Constraint::Cong { u, .. } => u,
            };
            if u[j].is_zero() {
                continue;
            }
            appears = true;
            if !u[j].abs().is_one() {
                nonunit += 1;
            }
            match c {
                Constraint::Eq { .. } => {
                    let mag = num::ToPrimitive::to_u64(&u[j].abs()).unwrap_or(u64::MAX);
                    in_eq = Some(in_eq.map_or(mag, |m: u64| m.min(mag)));
                }
                Constraint::Gt { .. } => {
                    gts += 1;
                    if u[j].is_positive() {
                        lowers += 1;
                    }
                }
                Constraint::Cong { .. } => congs += 1,
            }
        }
        let score = if !appears {
            (0, 0)
        } else if let Some(mag) = in_eq {
            (1, mag)
        } else {
            (2, (lowers.max(1)) * (1 + gts) * (1 + 4 * congs) * (1 + 2 * nonunit))
        };
        if best_score.map_or(true, |b| score < b) {
            best_score = Some(score);
            best = j;
        }
    }
    best
}

/// Affine form v·y + c over the variables remaining after removing one
/// coordinate; used inside the eliminator.
#[derive(Clone)]
struct AffineForm {
    v: Vec<Int>,
    c: Int,
}

/// Eliminate coordinate `j` from a conjunction: the exact projection of the
/// solution set onto the remaining coordinates, as a finite union.
fn eliminate_var(bs: &BasicSet, j: usize) -> Vec<BasicSet> {
    eliminate_var_capped(bs, j, u64::MAX).expect("uncapped")
}

/// As eliminate_var, but refuses (returns None) when the Cooper branch
/// would generate more than `cap` case splits; bounded-effort callers
/// treat that as an unknown rather than grinding through it.
fn eliminate_var_capped(bs: &BasicSet, j: usize, cap: u64) -> Option<Vec<BasicSet>> {
    let dim = bs.dim;
    let newdim = dim - 1;
    let strip = |u: &[Int]| -> Vec<Int> {
        let mut v = u.to_vec();
        v.remove(j);
        v
    };

    let mut others: Vec<Constraint> = Vec::new();
    // (coefficient on x_j, stripped row, rhs) per kind.
    let mut eqs: Vec<(Int, Vec<Int>, Int)> = Vec::new();
    let mut gts: Vec<(Int, Vec<Int>, Int)> = Vec::new();
    let mut congs: Vec<(Int, Vec<Int>, Int, Int)> = Vec::new();
    for c in &bs.constraints {
        let coeff = match c {
            Constraint::Eq { u, .. } | Constraint::Gt { u, .. } | Constraint::Cong { u, .. } => {
                u[j].clone()
            }
        };
        if coeff.is_zero() {
            match c {
                Constraint::Eq { u, a } => {
                    others.push(Constraint::Eq { u: strip(u), a: a.clone() })
                }
                Constraint::Gt { u, a } => {
                    others.push(Constraint::Gt { u: strip(u), a: a.clone() })
                }
                Constraint::Cong { u, a, b } => {
                    others.push(Constraint::Cong { u: strip(u), a: a.clone(), b: b.clone() })
                }
            }
            continue;
        }
        match c {
            Constraint::Eq { u, a } => eqs.push((coeff, strip(u), a.clone())),
            Constraint::Gt { u, a } => gts.push((coeff, strip(u), a.clone())),
            Constraint::Cong { u, a, b } => congs.push((coeff, strip(u), a.clone(), b.clone())),
        }
    }

    if eqs.is_empty() && gts.is_empty() && congs.is_empty() {
        return Some(BasicSet::new(newdim, others).into_iter().collect());
    }

    // Equality branch: use the equality with the smallest |coefficient| to
    // substitute x_j away; a non-unit coefficient leaves a divisibility
    // congruence behind.
    if !eqs.is_empty() {
        let chosen = eqs
            .iter()
            .enumerate()
            .min_by_key(|(_, (c, _, _))| c.abs())
            .map(|(i, _)| i)
            .expect("nonempty");
        let (mut c0, mut w0, mut a0) = eqs[chosen].clone();
        if c0.is_negative() {
            c0 = -c0;
            for x in w0.iter_mut() {
                *x = -std::mem::take(x);
            }
            a0 = -a0;
        }
        // c0 * x_j = a0 - w0·y
        let mut cs = others;
        if !c0.is_one() {
            cs.push(Constraint::Cong {
                u: w0.clone(),
                a: a0.clone(),
                b: c0.clone(),
            });
        }
        let substitute = |e: &Int, w: &[Int]| -> (Vec<Int>, Int) {
            // Row scaled by c0 with e*c0*x_j replaced by e*(a0 - w0·y):
            // returns (new row, additive shift to move to the rhs side).
            let v: Vec<Int> = w
                .iter()
                .zip(&w0)
                .map(|(wi, w0i)| wi * &c0 - e * w0i)
                .collect();
            let shift = e * &a0;
            (v, shift)
        };
        for (i, (e, w, a)) in eqs.iter().enumerate() {
            if i == chosen {
                continue;
            }
            let (v, shift) = substitute(e, w);
            cs.push(Constraint::Eq { u: v, a: a * &c0 - shift });
        }
        for (e, w, a) in &gts {
            let (v, shift) = substitute(e, w);
            cs.push(Constraint::Gt { u: v, a: a * &c0 - shift });
        }
        for (e, w, a, b) in &congs {
            let (v, shift) = substitute(e, w);
            cs.push(Constraint::Cong { u: v, a: a * &c0 - shift, b: b * &c0 });
        }
        return Some(BasicSet::new(newdim, cs).into_iter().collect());
    }

    // Cooper branch: scale x' = L x_j so every remaining row has
    // coefficient ±L, then enumerate candidate values x' = β + j over the
    // lower-bound terms β and the period M.
    let mut lcm = Int::one();
    for (c, _, _) in &gts {
        lcm = lcm.lcm(&c.abs());
    }
    for (c, _, _, _) in &congs {
        lcm = lcm.lcm(&c.abs());
    }
    // Lower bounds x' > f, upper bounds x' < f.
    let mut lowers: Vec<AffineForm> = Vec::new();
    let mut uppers: Vec<AffineForm> = Vec::new();
    for (c, w, a) in &gts {
        let s = &lcm / c.abs();
        if c.is_positive() {
            // L x_j > s(a - w·y)  =>  x' > -s*w·y + s*a
            lowers.push(AffineForm {
                v: w.iter().map(|x| -(x * &s)).collect(),
                c: a * &s,
            });
        } else {
            // -L x_j + s*w·y > s*a  =>  x' < s*w·y - s*a
            uppers.push(AffineForm {
                v: w.iter().map(|x| x * &s).collect(),
                c: -(a * &s),
            });
        }
    }
    // Congruences as x' ≡ f (mod m): x' - f ≡ 0.
    let mut scaled_congs: Vec<(AffineForm, Int)> = Vec::new();
    for (c, w, a, b) in &congs {
        let s = &lcm / c.abs();
        let sign = if c.is_positive() { Int::one() } else { -Int::one() };
        // sign*L x_j + s*w·y ≡ s*a (mod s*b); normalize to +L.
        let m = b * &s;
        let v: Vec<Int> = w.iter().map(|x| -(x * &s * &sign)).collect();
        let cst = a * &s * &sign;
        scaled_congs.push((AffineForm { v, c: cst }, m));
    }
    // x' ≡ 0 (mod L)
    let needs_div = !lcm.is_one();
    let mut period = lcm.clone();
    for (_, m) in &scaled_congs {
        period = period.lcm(m);
    }
    let splits = &period * Int::from(lowers.len().max(1) as u64);
    if splits > Int::from(cap) {
        return None;
    }

    let mut out: Vec<BasicSet> = Vec::new();
    let push_branch = |out: &mut Vec<BasicSet>, cs: Vec<Constraint>| {
        if let Some(bs) = BasicSet::new(newdim, cs) {
            out.push(bs);
        }
    };

    if lowers.is_empty() {
        // No lower bound: x' can go to -infinity; upper bounds are
        // satisfiable, only the periodic part constrains.
        let mut jv = Int::one();
        while jv <= period {
            if needs_div && !(&jv % &lcm).is_zero() {
                jv += 1;
                continue;
            }
            let mut cs = others.clone();
            for (f, m) in &scaled_congs {
                // x' = jv (mod period): jv ≡ f(y) (mod m), that is
                // -f.v·y ≡ f.c - jv (mod m)
                cs.push(Constraint::Cong {
                    u: f.v.iter().map(|x| -x).collect(),
                    a: &f.c - &jv,
                    b: m.clone(),
                });
            }
            push_branch(&mut out, cs);
            jv += 1;
        }
        return Some(dedup_sets(out));
    }

    for beta in &lowers {
        let mut jv = Int::one();
        while jv <= period {
            let mut cs = others.clone();
            // x' = beta + jv
            if needs_div {
                // beta.v·y + beta.c + jv ≡ 0 (mod L)
                cs.push(Constraint::Cong {
                    u: beta.v.clone(),
                    a: -(&beta.c + &jv),
                    b: lcm.clone(),
                });
            }
            for low in &lowers {
                // beta + jv > low: (beta.v - low.v)·y > low.c - beta.c - jv
                cs.push(Constraint::Gt {
                    u: beta.v.iter().zip(&low.v).map(|(a, b)| a - b).collect(),
                    a: &low.c - &beta.c - &jv,
                });
            }
            for up in &uppers {
                // beta + jv < up: (up.v - beta.v)·y > beta.c + jv - up.c
                cs.push(Constraint::Gt {
                    u: up.v.iter().zip(&beta.v).map(|(a, b)| a - b).collect(),
                    a: &beta.c + &jv - &up.c,
                });
            }
            for (f, m) in &scaled_congs {
                // beta + jv ≡ f (mod m): (beta.v - f.v)·y ≡ f.c - beta.c - jv
                cs.push(Constraint::Cong {
                    u: beta.v.iter().zip(&f.v).map(|(a, b)| a - b).collect(),
                    a: &f.c - &beta.c - &jv,
                    b: m.clone(),
                });
            }
            push_branch(&mut out, cs);
            jv += 1;
        }
    }
    Some(dedup_sets(out))
}

fn dedup_sets(mut v: Vec<BasicSet>) -> Vec<BasicSet> {
    v.sort();
    v.dedup();
    v
}

/// An integral affine transformation y = Ax + b from Z^k to Z^l.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<Int>>,
    pub offset: Vec<Int>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<Int>>, offset: Vec<Int>) -> Self {
        assert_eq!(matrix.len(), offset.len(), "matrix rows must match offset length");
        AffineMap { matrix, offset }
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|k| if i == k { Int::one() } else { Int::zero() }).collect())
            .collect();
        AffineMap { matrix, offset: vec![Int::zero(); dim] }
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.first().map_or(0, |r| r.len())
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, x: &[Int]) -> Vec<Int> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| dot(row, x) + b)
            .collect()
    }
}

/// Decide u·z > a when u is the zero vector; `None` when nontrivial.
pub(crate) fn check_trivial_gt(u: &[Int], a: &Int) -> Option<bool> {
    if u.iter().all(|x| x.is_zero()) {
        Some(a.is_negative())
    } else {
        None
    }
}

/// Column-style Hermite normal form: returns (H, U) with H = M·U, U
/// unimodular, H in column echelon form with positive pivots and the
/// remaining entries of each pivot row reduced into [0, pivot).
pub fn hermite_normal_form(m: &[Vec<Int>]) -> (Vec<Vec<Int>>, Vec<Vec<Int>>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut h: Vec<Vec<Int>> = m.to_vec();
    let mut u: Vec<Vec<Int>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|k| if i == k { Int::one() } else { Int::zero() })
                .collect()
        })
        .collect();
    let col_op = |h: &mut Vec<Vec<Int>>, u: &mut Vec<Vec<Int>>, dst: usize, src: usize, q: &Int| {
        for r in h.iter_mut() {
            let t = &r[dst] - q * &r[src];
            r[dst] = t;
        }
        for r in u.iter_mut() {
            let t = &r[dst] - q * &r[src];
            r[dst] = t;
        }
    };
    let col_swap = |h: &mut Vec<Vec<Int>>, u: &mut Vec<Vec<Int>>, a: usize, b: usize| {
        for r in h.iter_mut() {
            r.swap(a, b);
        }
        for r in u.iter_mut() {
            r.swap(a, b);
        }
    };
    let col_neg = |h: &mut Vec<Vec<Int>>, u: &mut Vec<Vec<Int>>, c: usize| {
        for r in h.iter_mut() {
            r[c] = -std::mem::take(&mut r[c]);
        }
        for r in u.iter_mut() {
            r[c] = -std::mem::take(&mut r[c]);
        }
    };
    let mut pivot_col = 0usize;
    for row in 0..rows {
        if pivot_col >= cols {
            break;
        }
        if (pivot_col..cols).all(|c| h[row][c].is_zero()) {
            continue;
        }
        // Gcd sweep: shrink entries in this row until one remains.
        loop {
            let mut best: Option<usize> = None;
            for c in pivot_col..cols {
                if !h[row][c].is_zero()
                    && best.map_or(true, |b| h[row][c].abs() < h[row][b].abs())
                {
                    best = Some(c);
                }
            }
            let b = best.expect("nonzero entry exists");
            if b != pivot_col {
                col_swap(&mut h, &mut u, pivot_col, b);
            }
            let mut done = true;
            for c in pivot_col + 1..cols {
                if h[row][c].is_zero() {
                    continue;
                }
                let q = h[row][c].div_floor(&h[row][pivot_col]);
                col_op(&mut h, &mut u, c, pivot_col, &q);
                if !h[row][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[row][pivot_col].is_negative() {
            col_neg(&mut h, &mut u, pivot_col);
        }
        let pivot = h[row][pivot_col].clone();
        for c in 0..pivot_col {
            let q = h[row][c].div_floor(&pivot);
            if !q.is_zero() {
                col_op(&mut h, &mut u, c, pivot_col, &q);
            }
        }
        pivot_col += 1;
    }
    (h, u)
}

/// Pivot positions (row, col) of a column echelon form.
fn echelon_pivots(h: &[Vec<Int>]) -> Vec<(usize, usize)> {
    let rows = h.len();
    let cols = if rows == 0 { 0 } else { h[0].len() };
    let mut pivots = Vec::new();
    let mut col = 0usize;
    for row in 0..rows {
        if col >= cols {
            break;
        }
        if !h[row][col].is_zero() {
            pivots.push((row, col));
            col += 1;
        }
    }
    pivots
}

/// Solve H·λ = x for an echelon H; `None` when x is outside the column
/// span over Z.
fn solve_echelon(h: &[Vec<Int>], x: &[Int]) -> Option<Vec<Int>> {
    let cols = if h.is_empty() { 0 } else { h[0].len() };
    let pivots = echelon_pivots(h);
    let mut lambda = vec![Int::zero(); cols];
    for &(row, col) in &pivots {
        let mut rem = x[row].clone();
        for c in 0..col {
            rem -= &h[row][c] * &lambda[c];
        }
        let (q, r) = rem.div_rem(&h[row][col]);
        if !r.is_zero() {
            return None;
        }
        lambda[col] = q;
    }
    // Verify the non-pivot rows.
    for (row, xr) in x.iter().enumerate() {
        let got: Int = (0..cols).map(|c| &h[row][c] * &lambda[c]).sum();
        if got != *xr {
            return None;
        }
    }
    Some(lambda)
}

/// Whether x lies in shift + (lattice generated by the columns of basis).
/// `basis` is given as a list of generator vectors.
pub fn lattice_coset_membership(x: &[Int], basis: &[Vec<Int>], shift: &[Int]) -> bool {
    let target: Vec<Int> = x.iter().zip(shift).map(|(a, b)| a - b).collect();
    if basis.is_empty() {
        return target.iter().all(|v| v.is_zero());
    }
    let rows = basis[0].len();
    let m: Vec<Vec<Int>> = (0..rows)
        .map(|r| basis.iter().map(|g| g[r].clone()).collect())
        .collect();
    let (h, _) = hermite_normal_form(&m);
    solve_echelon(&h, &target).is_some()
}

/// One solution plus a kernel basis for A·x = b over Z, or `None` when no
/// integer solution exists. Kernel vectors are returned as columns.
pub fn solve_diophantine(a: &[Vec<Int>], b: &[Int]) -> Option<(Vec<Int>, Vec<Vec<Int>>)> {
    let cols = if a.is_empty() { 0 } else { a[0].len() };
    if a.is_empty() {
        return Some((vec![Int::zero(); cols], (0..cols)
            .map(|i| (0..cols).map(|k| if i == k { Int::one() } else { Int::zero() }).collect())
            .collect()));
    }
    let (h, u) = hermite_normal_form(a);
    let lambda = solve_echelon(&h, b)?;
    // x0 = U·λ
    let x0: Vec<Int> = (0..cols).map(|r| dot(&u[r], &lambda)).collect();
    let pivot_cols: Vec<usize> = echelon_pivots(&h).iter().map(|&(_, c)| c).collect();
    let kernel: Vec<Vec<Int>> = (0..cols)
        .filter(|c| !pivot_cols.contains(c))
        .map(|c| (0..cols).map(|r| u[r][c].clone()).collect())
        .collect();
    Some((x0, kernel))
}
