//! Virtually abelian groups in subgroup-transversal normal form.
//!
//! A group is described by a finite-rank free abelian normal subgroup Z^n,
//! an ordered transversal of its cosets, a multiplication table on the
//! letters (basis generators and transversal elements), named
//! endomorphisms, and a weighted monoid generating set. Every element has
//! a unique normal form x·t with x in Z^n and t a transversal element.

use crate::intset::{solve_diophantine, Int};
use crate::{Error, Result};
use num::{One, Signed, Zero};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

fn int(v: i64) -> Int {
    Int::from(v)
}

// ---- raw JSON description ----

#[derive(Debug, Clone, Deserialize)]
pub struct RawNormalForm {
    pub x: Vec<i64>,
    pub t: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawMult {
    pub left: String,
    pub right: String,
    pub x: Vec<i64>,
    pub t: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawEndo {
    pub basis_images: Vec<RawNormalForm>,
    pub transversal_images: BTreeMap<String, RawNormalForm>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RawGenerator {
    pub word: Vec<String>,
    pub weight: u32,
}

/// The parsed group description file, prior to validation.
#[derive(Debug, Clone, Deserialize)]
pub struct GroupDescription {
    pub n: usize,
    pub transversal: Vec<String>,
    #[serde(default)]
    pub mult: Vec<RawMult>,
    #[serde(default)]
    pub endos: BTreeMap<String, RawEndo>,
    pub generators: Vec<RawGenerator>,
}

impl GroupDescription {
    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Malformed(format!("group description: {e}")))
    }
}

// ---- validated group ----

/// An element in normal form x·t.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    pub x: Vec<Int>,
    pub t: usize,
}

#[derive(Debug, Clone)]
pub struct Endo {
    pub name: String,
    /// Action on Z^n, columns phi(e_i).
    pub phi: Vec<Vec<Int>>,
    pub t_images: Vec<GroupElement>,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub word: Vec<String>,
    pub element: GroupElement,
    pub weight: u32,
}

#[derive(Debug, Clone)]
pub struct Group {
    pub n: usize,
    pub transversal: Vec<String>,
    /// Normal form of t_i · t_j.
    table: Vec<Vec<(Vec<Int>, usize)>>,
    /// Conjugation matrices: column k of t_mats[i] is t_i e_k t_i^{-1}.
    pub t_mats: Vec<Vec<Vec<Int>>>,
    t_mat_invs: Vec<Vec<Vec<Int>>>,
    /// Index of the transversal element whose coset is inverse to t_i.
    pub inv_t: Vec<usize>,
    inv_elem: Vec<GroupElement>,
    pub generators: Vec<Generator>,
    pub endos: BTreeMap<String, Endo>,
}

/// Square-matrix helpers; matrices are stored as column vectors.
pub(crate) fn mat_vec(cols: &[Vec<Int>], v: &[Int]) -> Vec<Int> {
    let n = cols.first().map_or(0, |c| c.len());
    let mut out = vec![Int::zero(); n];
    for (col, coeff) in cols.iter().zip(v) {
        for (o, c) in out.iter_mut().zip(col) {
            *o += c * coeff;
        }
    }
    out
}

pub(crate) fn mat_mul(a: &[Vec<Int>], b: &[Vec<Int>]) -> Vec<Vec<Int>> {
    b.iter().map(|col| mat_vec(a, col)).collect()
}

fn identity_matrix(n: usize) -> Vec<Vec<Int>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Int::one() } else { Int::zero() })
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free elimination.
fn det(cols: &[Vec<Int>]) -> Int {
    let n = cols.len();
    if n == 0 {
        return Int::one();
    }
    // Work on rows for convenience.
    let mut m: Vec<Vec<Int>> = (0..n)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut sign = Int::one();
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return Int::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Inverse of a unimodular integer matrix (columns in, columns out).
fn unimodular_inverse(cols: &[Vec<Int>]) -> Option<Vec<Vec<Int>>> {
    let n = cols.len();
    let rows: Vec<Vec<Int>> = (0..n)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![Int::zero(); n];
        e[i] = Int::one();
        let (x0, _) = solve_diophantine(&rows, &e)?;
        out.push(x0);
    }
    Some(out)
}

impl Group {
    pub fn identity(&self) -> GroupElement {
        GroupElement { x: vec![Int::zero(); self.n], t: 0 }
    }

    pub fn degree(&self) -> usize {
        self.transversal.len()
    }

    pub fn element(&self, x: Vec<Int>, t: usize) -> GroupElement {
        debug_assert_eq!(x.len(), self.n);
        debug_assert!(t < self.degree());
        GroupElement { x, t }
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let (tx, tt) = &self.table[g.t][h.t];
        let mut x = mat_vec(&self.t_mats[g.t], &h.x);
        for ((o, a), b) in x.iter_mut().zip(&g.x).zip(tx) {
            *o += a;
            *o += b;
        }
        GroupElement { x, t: *tt }
    }

    pub fn invert(&self, g: &GroupElement) -> GroupElement {
        // g^{-1} = t_g^{-1} · (-x_g), with t_g^{-1} precomputed.
        let neg: Vec<Int> = g.x.iter().map(|v| -v.clone()).collect();
        self.multiply(&self.inv_elem[g.t], &GroupElement { x: neg, t: 0 })
    }

    pub fn conjugate(&self, c: &GroupElement, g: &GroupElement) -> GroupElement {
        let ci = self.invert(c);
        self.multiply(&self.multiply(c, g), &ci)
    }

    pub fn apply_endo(&self, endo: &Endo, g: &GroupElement) -> GroupElement {
        let img = mat_vec(&endo.phi, &g.x);
        self.multiply(&GroupElement { x: img, t: 0 }, &endo.t_images[g.t])
    }

    pub fn endo(&self, name: &str) -> Result<&Endo> {
        self.endos
            .get(name)
            .ok_or_else(|| Error::UnknownEndo(name.to_string()))
    }

    /// The element of a single letter: a basis letter e1..en / E1..En or a
    /// transversal label.
    pub fn letter(&self, l: &str) -> Result<GroupElement> {
        if let Some(idx) = self.transversal.iter().position(|t| t == l) {
            return Ok(GroupElement { x: vec![Int::zero(); self.n], t: idx });
        }
        let (sign, rest) = if let Some(r) = l.strip_prefix('e') {
            (1i64, r)
        } else if let Some(r) = l.strip_prefix('E') {
            (-1i64, r)
        } else {
            return Err(Error::UnknownLetter(l.to_string()));
        };
        let k: usize = rest
            .parse()
            .map_err(|_| Error::UnknownLetter(l.to_string()))?;
        if k == 0 || k > self.n {
            return Err(Error::UnknownLetter(l.to_string()));
        }
        let mut x = vec![Int::zero(); self.n];
        x[k - 1] = int(sign);
        Ok(GroupElement { x, t: 0 })
    }

    pub fn normalize(&self, word: &[String]) -> Result<GroupElement> {
        let mut g = self.identity();
        for l in word {
            let h = self.letter(l)?;
            g = self.multiply(&g, &h);
        }
        Ok(g)
    }

    /// tau_g restricted to Z^n, as a matrix with columns g e_k g^{-1}.
    pub fn conjugation_matrix(&self, g: &GroupElement) -> Vec<Vec<Int>> {
        self.t_mats[g.t].clone()
    }

    pub fn conjugation_matrix_inverse(&self, t: usize) -> &Vec<Vec<Int>> {
        &self.t_mat_invs[t]
    }

    pub fn max_generator_weight(&self) -> u32 {
        self.generators.iter().map(|g| g.weight).max().unwrap_or(1)
    }

    /// Weighted ball: every element of weight at most `bound`, with its
    /// weight, by Dijkstra over the labelled Cayley graph.
    pub fn weighted_ball(&self, bound: u32) -> BTreeMap<GroupElement, u32> {
        let mut dist: BTreeMap<GroupElement, u32> = BTreeMap::new();
        let mut heap: BinaryHeap<(std::cmp::Reverse<u32>, GroupElement)> = BinaryHeap::new();
        dist.insert(self.identity(), 0);
        heap.push((std::cmp::Reverse(0), self.identity()));
        while let Some((std::cmp::Reverse(d), g)) = heap.pop() {
            if dist.get(&g).map_or(true, |&best| d > best) {
                continue;
            }
            for gen in &self.generators {
                let nd = d + gen.weight;
                if nd > bound {
                    continue;
                }
                let h = self.multiply(&g, &gen.element);
                if dist.get(&h).map_or(true, |&best| nd < best) {
                    dist.insert(h.clone(), nd);
                    heap.push((std::cmp::Reverse(nd), h));
                }
            }
        }
        dist
    }

    /// Exact weight of g, or None when it exceeds the bound.
    pub fn element_weight(&self, g: &GroupElement, bound: u32) -> Option<u32> {
        self.weighted_ball(bound).get(g).copied()
    }

    /// The extended generating set: all distinct nontrivial evaluations of
    /// products of 1..=D generators, with exact weights.
    pub fn extended_generating_set(&self) -> Vec<(GroupElement, u32)> {
        let d = self.degree();
        let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
        let mut frontier: Vec<GroupElement> = vec![self.identity()];
        for _ in 0..d {
            let mut next = Vec::new();
            for g in &frontier {
                for gen in &self.generators {
                    let h = self.multiply(g, &gen.element);
                    seen.insert(h.clone());
                    next.push(h);
                }
            }
            next.sort();
            next.dedup();
            frontier = next;
        }
        seen.remove(&self.identity());
        let bound = d as u32 * self.max_generator_weight();
        let ball = self.weighted_ball(bound);
        seen.into_iter()
            .map(|g| {
                let w = ball
                    .get(&g)
                    .copied()
                    .expect("extended generator lies in the bounded ball");
                (g, w)
            })
            .collect()
    }
}

// ---- validation and construction ----

fn letter_list(desc: &GroupDescription) -> Vec<String> {
    let mut out = Vec::new();
    for i in 1..=desc.n {
        out.push(format!("e{i}"));
        out.push(format!("E{i}"));
    }
    out.extend(desc.transversal.iter().cloned());
    out
}

/// Validate a description, returning the full list of failures (empty when
/// the description is valid).
pub fn validate(desc: &GroupDescription) -> Vec<String> {
    match Group::build(desc) {
        Ok(_) => vec![],
        Err(Error::InvalidDescription(msg)) => {
            msg.split(" ;; ").map(|s| s.to_string()).collect()
        }
        Err(e) => vec![e.to_string()],
    }
}

impl Group {
    pub fn from_json_str(s: &str) -> Result<Group> {
        Group::build(&GroupDescription::from_json_str(s)?)
    }

    pub fn build(desc: &GroupDescription) -> Result<Group> {
        let mut errors: Vec<String> = Vec::new();
        let n = desc.n;
        let d = desc.transversal.len();
        if n == 0 {
            return Err(Error::InvalidDescription("n must be at least 1".into()));
        }
        if d == 0 || desc.transversal[0] != "1" {
            return Err(Error::InvalidDescription(
                "transversal must start with the identity label \"1\"".into(),
            ));
        }
        {
            let mut labels: BTreeSet<&String> = BTreeSet::new();
            for t in &desc.transversal {
                if !labels.insert(t) {
                    return Err(Error::InvalidDescription(format!(
                        "duplicate transversal label `{t}`"
                    )));
                }
            }
        }
        let t_index = |label: &str| -> Option<usize> {
            desc.transversal.iter().position(|t| t == label)
        };
        // Index the provided multiplication entries.
        let mut entries: BTreeMap<(String, String), (Vec<Int>, usize)> = BTreeMap::new();
        for e in &desc.mult {
            if e.x.len() != n {
                return Err(Error::InvalidDescription(format!(
                    "mult entry ({}, {}) has x of length {}, expected {}",
                    e.left,
                    e.right,
                    e.x.len(),
                    n
                )));
            }
            let t = t_index(&e.t).ok_or_else(|| {
                Error::InvalidDescription(format!(
                    "mult entry ({}, {}) targets unknown transversal `{}`",
                    e.left, e.right, e.t
                ))
            })?;
            entries.insert(
                (e.left.clone(), e.right.clone()),
                (e.x.iter().map(|&v| int(v)).collect(), t),
            );
        }
        // Conjugation matrices from the (t, e_i) entries.
        let mut t_mats: Vec<Vec<Vec<Int>>> = Vec::with_capacity(d);
        t_mats.push(identity_matrix(n));
        for ti in 1..d {
            let label = &desc.transversal[ti];
            let mut cols = Vec::with_capacity(n);
            for i in 1..=n {
                let key = (label.clone(), format!("e{i}"));
                match entries.get(&key) {
                    Some((x, t)) => {
                        if *t != ti {
                            errors.push(format!(
                                "normality broken: {label}·e{i} lands in coset `{}`",
                                desc.transversal[*t]
                            ));
                        }
                        cols.push(x.clone());
                    }
                    None => {
                        errors.push(format!("missing mult entry ({label}, e{i})"));
                        cols.push(vec![Int::zero(); n]);
                    }
                }
            }
            t_mats.push(cols);
        }
        for (ti, m) in t_mats.iter().enumerate() {
            let dt = det(m);
            if !dt.abs().is_one() {
                errors.push(format!(
                    "conjugation by `{}` is not an automorphism of Z^n (det {dt})",
                    desc.transversal[ti]
                ));
            }
        }
        if !errors.is_empty() {
            return Err(Error::InvalidDescription(errors.join(" ;; ")));
        }
        // Full transversal multiplication table.
        let mut table: Vec<Vec<(Vec<Int>, usize)>> =
            vec![vec![(vec![Int::zero(); n], 0); d]; d];
        for i in 0..d {
            for j in 0..d {
                if i == 0 {
                    table[i][j] = (vec![Int::zero(); n], j);
                } else if j == 0 {
                    table[i][j] = (vec![Int::zero(); n], i);
                } else {
                    let key = (desc.transversal[i].clone(), desc.transversal[j].clone());
                    match entries.get(&key) {
                        Some(v) => table[i][j] = v.clone(),
                        None => errors.push(format!(
                            "missing mult entry ({}, {})",
                            desc.transversal[i], desc.transversal[j]
                        )),
                    }
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::InvalidDescription(errors.join(" ;; ")));
        }
        // Coset structure: rows must be permutations with an inverse for
        // every element, and distinct labels must mean distinct cosets.
        let mut inv_t = vec![0usize; d];
        for i in 0..d {
            let row: BTreeSet<usize> = (0..d).map(|j| table[i][j].1).collect();
            if row.len() != d {
                errors.push(format!(
                    "coset products of `{}` do not reach every coset",
                    desc.transversal[i]
                ));
                continue;
            }
            inv_t[i] = (0..d).find(|&j| table[i][j].1 == 0).expect("row is onto");
        }
        if !errors.is_empty() {
            return Err(Error::InvalidDescription(errors.join(" ;; ")));
        }
        let t_mat_invs: Vec<Vec<Vec<Int>>> = t_mats
            .iter()
            .map(|m| unimodular_inverse(m).expect("determinant checked above"))
            .collect();
        // t_i^{-1} = t_{inv} · (-(t_i · t_inv)) with the product in Z^n.
        let inv_elem: Vec<GroupElement> = (0..d)
            .map(|i| {
                let j = inv_t[i];
                let prod = &table[i][j].0;
                let neg: Vec<Int> = prod.iter().map(|v| -v.clone()).collect();
                let x = mat_vec(&t_mat_invs[i], &neg);
                let xj = mat_vec(&t_mats[j], &x);
                // t_i^{-1} = x · t_j with t_i (x t_j) = 1: verified below by
                // the group axioms test; direct construction:
                // t_i x t_j = (T_{t_i} x + x_{ij}) t = 0 => x = T^{-1}(-x_ij)
                let _ = xj;
                GroupElement { x, t: j }
            })
            .collect();
        let mut group = Group {
            n,
            transversal: desc.transversal.clone(),
            table,
            t_mats,
            t_mat_invs,
            inv_t,
            inv_elem,
            generators: vec![],
            endos: BTreeMap::new(),
        };
        // Consistency of every provided entry with the derived product.
        for ((l, r), (x, t)) in &entries {
            let gl = match group.letter(l) {
                Ok(g) => g,
                Err(_) => {
                    errors.push(format!("mult entry references unknown letter `{l}`"));
                    continue;
                }
            };
            let gr = match group.letter(r) {
                Ok(g) => g,
                Err(_) => {
                    errors.push(format!("mult entry references unknown letter `{r}`"));
                    continue;
                }
            };
            let got = group.multiply(&gl, &gr);
            if got.x != *x || got.t != *t {
                errors.push(format!(
                    "mult entry ({l}, {r}) is inconsistent with the derived product"
                ));
            }
        }
        // Distinct cosets.
        for i in 0..d {
            for j in 0..d {
                if i != j && group.table[i][group.inv_t[j]].1 == 0 {
                    errors.push(format!(
                        "transversal elements `{}` and `{}` lie in the same coset",
                        desc.transversal[i], desc.transversal[j]
                    ));
                }
            }
        }
        // Exhaustive associativity over all letter triples.
        let letters = letter_list(desc);
        let elems: Vec<GroupElement> = letters
            .iter()
            .map(|l| group.letter(l).expect("letters are known"))
            .collect();
        'assoc: for (la, a) in letters.iter().zip(&elems) {
            for (lb, b) in letters.iter().zip(&elems) {
                for (lc, c) in letters.iter().zip(&elems) {
                    let left = group.multiply(&group.multiply(a, b), c);
                    let right = group.multiply(a, &group.multiply(b, c));
                    if left != right {
                        errors.push(format!(
                            "associativity fails on the triple ({la}, {lb}, {lc})"
                        ));
                        break 'assoc;
                    }
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::InvalidDescription(errors.join(" ;; ")));
        }
        // Endomorphisms.
        for (name, raw) in &desc.endos {
            if raw.basis_images.len() != n {
                errors.push(format!("endo `{name}` must give {n} basis images"));
                continue;
            }
            let mut phi: Vec<Vec<Int>> = Vec::with_capacity(n);
            let mut ok = true;
            for (i, img) in raw.basis_images.iter().enumerate() {
                if img.t != "1" {
                    errors.push(format!(
                        "endo `{name}`: Z^n not phi-invariant (image of e{} leaves Z^n)",
                        i + 1
                    ));
                    ok = false;
                }
                if img.x.len() != n {
                    errors.push(format!("endo `{name}`: basis image {} has wrong length", i + 1));
                    ok = false;
                    break;
                }
                phi.push(img.x.iter().map(|&v| int(v)).collect());
            }
            if !ok {
                continue;
            }
            let mut t_images = Vec::with_capacity(d);
            for label in &desc.transversal {
                match raw.transversal_images.get(label) {
                    Some(img) => {
                        let t = match t_index(&img.t) {
                            Some(t) => t,
                            None => {
                                errors.push(format!(
                                    "endo `{name}`: image of `{label}` targets unknown transversal `{}`",
                                    img.t
                                ));
                                ok = false;
                                break;
                            }
                        };
                        t_images.push(GroupElement {
                            x: img.x.iter().map(|&v| int(v)).collect(),
                            t,
                        });
                    }
                    None => {
                        errors.push(format!("endo `{name}` misses the image of `{label}`"));
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let endo = Endo { name: name.clone(), phi, t_images };
            // Homomorphism property on all letter pairs.
            for (la, a) in letters.iter().zip(&elems) {
                for (lb, b) in letters.iter().zip(&elems) {
                    let lhs = group.apply_endo(&endo, &group.multiply(a, b));
                    let rhs =
                        group.multiply(&group.apply_endo(&endo, a), &group.apply_endo(&endo, b));
                    if lhs != rhs {
                        errors.push(format!(
                            "endo `{name}` is not a homomorphism on the pair ({la}, {lb})"
                        ));
                    }
                }
            }
            group.endos.insert(name.clone(), endo);
        }
        // Generators.
        for g in &desc.generators {
            if g.weight == 0 {
                errors.push(format!("generator {:?} has zero weight", g.word));
                continue;
            }
            match group.normalize(&g.word) {
                Ok(e) => group.generators.push(Generator {
                    word: g.word.clone(),
                    element: e,
                    weight: g.weight,
                }),
                Err(err) => errors.push(format!("generator {:?}: {err}", g.word)),
            }
        }
        if group.generators.is_empty() {
            errors.push("no generators given".into());
        }
        if !errors.is_empty() {
            return Err(Error::InvalidDescription(errors.join(" ;; ")));
        }
        // Generation: exact coset coverage by BFS on the coset graph, plus
        // a bounded element search that must reach every ±e_i.
        {
            let mut seen = vec![false; d];
            seen[0] = true;
            let mut frontier = vec![0usize];
            while let Some(t) = frontier.pop() {
                for gen in &group.generators {
                    let nt = group.table[t][gen.element.t].1;
                    if !seen[nt] {
                        seen[nt] = true;
                        frontier.push(nt);
                    }
                }
            }
            for (i, s) in seen.iter().enumerate() {
                if !s {
                    errors.push(format!(
                        "generators never reach the coset of `{}`",
                        desc.transversal[i]
                    ));
                }
            }
            let bound = 2 * d as u32 * group.max_generator_weight();
            let ball = group.weighted_ball(bound.max(4));
            for i in 0..n {
                for sign in [1i64, -1] {
                    let mut x = vec![Int::zero(); n];
                    x[i] = int(sign);
                    let e = GroupElement { x, t: 0 };
                    if !ball.contains_key(&e) {
                        errors.push(format!(
                            "generators do not reach {}e{} within weight {bound} (generation check)",
                            if sign < 0 { "-" } else { "" },
                            i + 1
                        ));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(group)
        } else {
            Err(Error::InvalidDescription(errors.join(" ;; ")))
        }
    }
}

/// Bundled example group descriptions.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "zn" => Some(include_str!("../groups/zn.json")),
        "z_phi_neg" => Some(include_str!("../groups/z_phi_neg.json")),
        "dihedral" => Some(include_str!("../groups/dihedral.json")),
        "klein" => Some(include_str!("../groups/klein.json")),
        _ => None,
    }
}

pub fn bundled_names() -> &'static [&'static str] {
    &["zn", "z_phi_neg", "dihedral", "klein"]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group(name: &str) -> Group {
        Group::from_json_str(bundled(name).unwrap()).unwrap()
    }

    #[test]
    fn bundled_descriptions_are_valid() {
        for name in bundled_names() {
            let desc = GroupDescription::from_json_str(bundled(name).unwrap()).unwrap();
            let report = validate(&desc);
            assert!(report.is_empty(), "{name}: {report:?}");
        }
    }

    #[test]
    fn phi_invariance_violation_is_reported() {
        let mut desc =
            GroupDescription::from_json_str(bundled("dihedral").unwrap()).unwrap();
        desc.endos.get_mut("id").unwrap().basis_images[0].t = "a".into();
        let report = validate(&desc);
        assert!(
            report.iter().any(|r| r.contains("phi-invariant")),
            "{report:?}"
        );
    }

    #[test]
    fn broken_table_is_reported() {
        let mut desc =
            GroupDescription::from_json_str(bundled("dihedral").unwrap()).unwrap();
        // Corrupt b·b.
        for e in desc.mult.iter_mut() {
            if e.left == "b" && e.right == "b" {
                e.x = vec![1];
            }
        }
        let report = validate(&desc);
        assert!(!report.is_empty());
    }

    #[test]
    fn dihedral_normal_forms() {
        let g = group("dihedral");
        // a·a = e1
        let a = g.letter("a").unwrap();
        let aa = g.multiply(&a, &a);
        assert_eq!(aa, g.element(vec![int(1)], 0));
        // empty word is the identity
        assert_eq!(g.normalize(&[]).unwrap(), g.identity());
        // table consistency for a·b
        let b = g.letter("b").unwrap();
        let ab = g.multiply(&a, &b);
        assert_eq!(ab, g.element(vec![int(0)], 3));
        // conjugation matrix of b is (-1)
        assert_eq!(g.t_mats[2], vec![vec![int(-1)]]);
    }

    #[test]
    fn inverses_cancel() {
        for name in bundled_names() {
            let g = group(name);
            let ball = g.weighted_ball(4);
            for e in ball.keys() {
                let inv = g.invert(e);
                assert_eq!(g.multiply(e, &inv), g.identity(), "{name} {e:?}");
                assert_eq!(g.multiply(&inv, e), g.identity(), "{name} {e:?}");
            }
        }
    }

    #[test]
    fn endo_identity_fixes_everything() {
        for name in bundled_names() {
            let g = group(name);
            let id = g.endo("id").unwrap();
            for e in g.weighted_ball(4).keys() {
                assert_eq!(&g.apply_endo(id, e), e);
            }
        }
    }

    #[test]
    fn endo_negation_on_z() {
        let g = group("z_phi_neg");
        let neg = g.endo("neg").unwrap();
        let three = g.element(vec![int(3)], 0);
        assert_eq!(g.apply_endo(neg, &three), g.element(vec![int(-3)], 0));
    }

    #[test]
    fn extended_generating_set_examples() {
        let zn = group("zn");
        let s = zn.extended_generating_set();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|(_, w)| *w == 1));

        let dih = group("dihedral");
        let s = dih.extended_generating_set();
        let a2 = dih.element(vec![int(1)], 0);
        let w = s.iter().find(|(g, _)| *g == a2).map(|(_, w)| *w);
        assert_eq!(w, Some(2), "a^2 must appear with weight 2");
        assert!(!s.iter().any(|(g, _)| *g == dih.identity()));
    }

    #[test]
    fn element_weights_dihedral() {
        let g = group("dihedral");
        assert_eq!(g.element_weight(&g.identity(), 6), Some(0));
        let a = g.letter("a").unwrap();
        assert_eq!(g.element_weight(&a, 6), Some(1));
        let a2 = g.element(vec![int(1)], 0);
        assert_eq!(g.element_weight(&a2, 6), Some(2));
        let ab = g.element(vec![int(0)], 3);
        assert_eq!(g.element_weight(&ab, 6), Some(2));
    }

    #[test]
    fn element_weights_zn() {
        let g = group("zn");
        let e = g.element(vec![int(1), int(1)], 0);
        assert_eq!(g.element_weight(&e, 6), Some(2));
    }

    #[test]
    fn extended_weights_preserve_metric() {
        // The induced weight from the extended set agrees with the original
        // on a ball.
        for name in bundled_names() {
            let g = group(name);
            let ball = g.weighted_ball(6);
            let ext = g.extended_generating_set();
            // Dijkstra over the extended set.
            let mut aux = g.clone();
            aux.generators = ext
                .iter()
                .map(|(e, w)| Generator { word: vec![], element: e.clone(), weight: *w })
                .collect();
            let ball_ext = aux.weighted_ball(6);
            for (e, w) in &ball {
                assert_eq!(ball_ext.get(e), Some(w), "{name} {e:?}");
            }
            for (e, w) in &ball_ext {
                assert_eq!(ball.get(e), Some(w), "{name} {e:?}");
            }
        }
    }

    #[test]
    fn pigeonhole_subproduct_in_zn() {
        use proptest::test_runner::{Config, TestRunner};
        for name in ["dihedral", "klein"] {
            let g = group(name);
            let d = g.degree();
            let mut runner = TestRunner::new(Config::with_cases(100));
            let strat = prop::collection::vec(0..g.generators.len(), d);
            runner
                .run(&strat, |picks| {
                    let mut prefixes = vec![g.identity()];
                    for p in &picks {
                        let last = prefixes.last().unwrap().clone();
                        prefixes.push(g.multiply(&last, &g.generators[*p].element));
                    }
                    let found = (0..prefixes.len()).any(|i| {
                        (i + 1..prefixes.len()).any(|j| {
                            let q = g.multiply(&g.invert(&prefixes[i]), &prefixes[j]);
                            q.t == 0
                        })
                    });
                    prop_assert!(found, "no subproduct in Z^n for picks {:?}", picks);
                    Ok(())
                })
                .unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn normalize_is_a_morphism(
            u in prop::collection::vec(0usize..6, 0..5),
            v in prop::collection::vec(0usize..6, 0..5),
        ) {
            let g = group("klein");
            let letters = ["e1", "E1", "e2", "E2", "b", "1"];
            let word = |ids: &[usize]| -> Vec<String> {
                ids.iter().map(|&i| letters[i].to_string()).collect()
            };
            let wu = word(&u);
            let wv = word(&v);
            let mut wuv = wu.clone();
            wuv.extend(wv.iter().cloned());
            let lhs = g.normalize(&wuv).unwrap();
            let rhs = g.multiply(&g.normalize(&wu).unwrap(), &g.normalize(&wv).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn endos_respect_multiplication(
            u in prop::collection::vec(0usize..5, 0..4),
            v in prop::collection::vec(0usize..5, 0..4),
        ) {
            let g = group("dihedral");
            let letters = ["e1", "E1", "a", "b", "ab"];
            let word = |ids: &[usize]| -> Vec<String> {
                ids.iter().map(|&i| letters[i].to_string()).collect()
            };
            let a = g.normalize(&word(&u)).unwrap();
            let b = g.normalize(&word(&v)).unwrap();
            for endo in g.endos.values() {
                let lhs = g.apply_endo(endo, &g.multiply(&a, &b));
                let rhs = g.multiply(&g.apply_endo(endo, &a), &g.apply_endo(endo, &b));
                prop_assert_eq!(lhs, rhs, "endo {}", endo.name);
            }
        }
    }
}
