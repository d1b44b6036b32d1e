//! Twisted conjugacy growth.
//!
//! A twisted class meets each coset Z^n·t in a finite union of lattice
//! cosets of H(t), the image of I − T_t·Φ. Classes are enumerated by
//! tuples of patterns, one component per transversal element; the tuple
//! components are tied together by elementary equations, and the lightest
//! component of each admissible tuple is selected to represent its class.

use crate::cosetreps::{
    echelon_lattice_basis, unique_reps, weighted_series, SubgroupH,
};
use crate::intset::{Constraint, Int, PolyhedralSet};
use crate::patterns::{PatternRep, PatternSpace};
use crate::ratfun::RationalSeries;
use crate::vagroup::{mat_mul, mat_vec, Endo, Group, GroupElement};
use crate::{Error, Result};
use num::{One, Zero};
use std::collections::BTreeMap;

fn zeros(k: usize) -> Vec<Int> {
    vec![Int::zero(); k]
}

/// The matrix I − T_t·Φ for a transversal index, as columns.
fn twist_matrix(group: &Group, endo: &Endo, t: usize) -> Vec<Vec<Int>> {
    let m = mat_mul(&group.t_mats[t], &endo.phi);
    let n = group.n;
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let id = if i == j { Int::one() } else { Int::zero() };
                    id - &m[j][i]
                })
                .collect()
        })
        .collect()
}

/// Per transversal element t, the subgroup Image(I − T_t·Φ) of Z^n.
/// Conjugation by the Z^n part drops out since Z^n is abelian.
pub fn twist_subgroups(group: &Group, endo: &Endo) -> Result<Vec<SubgroupH>> {
    (0..group.degree())
        .map(|t| {
            let cols = twist_matrix(group, endo, t);
            let basis = echelon_lattice_basis(&cols, group.n);
            SubgroupH::new(group.n, basis)
        })
        .collect()
}

/// All D-tuples of patterns (one component per transversal element) whose
/// components can hold twisted conjugates of the first component: the
/// conjugate of the first evaluation by t_j must land in the coset of the
/// j-th pattern.
pub fn permissible_tuples(
    group: &Group,
    space: &PatternSpace,
    endo: &Endo,
) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..space.patterns.len()).collect();
    permissible_tuples_among(group, space, endo, &all)
}

/// As permissible_tuples, but with components drawn from a subset of the
/// patterns. Restricting to patterns with nonempty representative sets is
/// lossless (a tuple with an unrepresentable component holds no class) and
/// keeps the tuple count manageable for larger transversals.
pub fn permissible_tuples_among(
    group: &Group,
    space: &PatternSpace,
    endo: &Endo,
    allowed: &[usize],
) -> Vec<Vec<usize>> {
    let dg = group.degree();
    let mut by_t: Vec<Vec<usize>> = vec![Vec::new(); dg];
    for &i in allowed {
        by_t[space.patterns[i].t].push(i);
    }
    let mut out = Vec::new();
    for &p1 in allowed {
        let e1 = &space.patterns[p1].eval;
        let mut tuples = vec![vec![p1]];
        for j in 1..dg {
            let tj = GroupElement { x: zeros(group.n), t: j };
            let conj = group.multiply(
                &group.multiply(&tj, e1),
                &group.invert(&group.apply_endo(endo, &tj)),
            );
            let mut next = Vec::new();
            for tu in &tuples {
                for &q in &by_t[conj.t] {
                    let mut t2 = tu.clone();
                    t2.push(q);
                    next.push(t2);
                }
            }
            tuples = next;
        }
        out.extend(tuples);
    }
    out
}

/// One tuple per permutation class: among the tuples equal as multisets of
/// patterns, keep the lexicographically least.
pub fn reduce_permutations(tuples: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut best: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for t in tuples {
        let mut key = t.clone();
        key.sort_unstable();
        match best.get(&key) {
            Some(b) if *b <= t => {}
            _ => {
                best.insert(key, t);
            }
        }
    }
    best.into_values().collect()
}

/// The polyhedral set of admissible exponent tuples for one pattern tuple,
/// over the concatenated exponent blocks.
pub struct ClassTupleSet {
    pub tuple: Vec<usize>,
    pub set: PolyhedralSet,
    pub offsets: Vec<usize>,
    pub reps: Vec<PatternRep>,
}

/// Exponent tuples whose components are the chosen coset representatives
/// and are twisted conjugates of component one by elements of Z^n·t_j:
/// one elementary equation per transversal row, with the Z^n conjugator
/// block eliminated by projection.
pub fn build_class_tuple_set(
    group: &Group,
    space: &PatternSpace,
    endo: &Endo,
    tuple: &[usize],
    u: &BTreeMap<usize, (PatternRep, PolyhedralSet)>,
) -> Result<ClassTupleSet> {
    let n = group.n;
    let dg = group.degree();
    let mut offsets = Vec::with_capacity(dg);
    let mut m_tot = 0usize;
    let mut reps = Vec::with_capacity(dg);
    for &p in tuple {
        offsets.push(m_tot);
        let (rep, _) = &u[&p];
        m_tot += rep.weight_a.len();
        reps.push(rep.clone());
    }
    let mut prod = PolyhedralSet::universe(0);
    for &p in tuple {
        prod = prod.product(&u[&p].1);
    }
    if dg == 1 {
        return Ok(ClassTupleSet { tuple: tuple.to_vec(), set: prod, offsets, reps });
    }
    let zdim = (dg - 1) * n;
    let dim = m_tot + zdim;
    let full = prod.product(&PolyhedralSet::universe(zdim));
    let mut cs: Vec<Constraint> = Vec::with_capacity((dg - 1) * n);
    let t_pi1 = space.patterns[tuple[0]].t;
    for j in 1..dg {
        let rep1c = space.affine_rep(group, tuple[0], j);
        let repj = &reps[j];
        let cj = twist_matrix(group, endo, space.patterns[tuple[j]].t);
        let tj = GroupElement { x: zeros(n), t: j };
        let tail = group.multiply(
            &group.multiply(&tj, &GroupElement { x: zeros(n), t: t_pi1 }),
            &group.invert(&group.apply_endo(endo, &tj)),
        );
        let tb = mat_vec(&group.t_mats[j], &reps[0].b);
        for i in 0..n {
            let mut row = zeros(dim);
            for (k, c) in rep1c.a[i].iter().enumerate() {
                row[offsets[0] + k] = c.clone();
            }
            for (k, c) in repj.a[i].iter().enumerate() {
                row[offsets[j] + k] = -c.clone();
            }
            for k in 0..n {
                row[m_tot + (j - 1) * n + k] = cj[k][i].clone();
            }
            let a = &repj.b[i] - &tb[i] - &tail.x[i];
            cs.push(Constraint::Eq { u: row, a });
        }
    }
    let set = full
        .intersect(&PolyhedralSet::from_constraints(dim, cs))?
        .project(&(0..m_tot).collect::<Vec<_>>());
    Ok(ClassTupleSet { tuple: tuple.to_vec(), set, offsets, reps })
}

/// One selected word set per tuple component, with its weight form over
/// the full tuple coordinates.
pub struct SelectedWords {
    pub pattern: usize,
    pub set: PolyhedralSet,
    pub weights: Vec<Int>,
    pub shift: Int,
}

/// Select for each component the tuples where it carries the minimal
/// weight, ties going to the lowest index: strictly lighter than earlier
/// components, no heavier than later ones.
pub fn minimal_weight_language(cts: &ClassTupleSet) -> Vec<SelectedWords> {
    let m_tot = cts.set.dim();
    let dg = cts.tuple.len();
    let mut out = Vec::with_capacity(dg);
    for i in 0..dg {
        let mut cs: Vec<Constraint> = Vec::with_capacity(dg - 1);
        for j in 0..dg {
            if j == i {
                continue;
            }
            // weight_j - weight_i > 0 (or >= 0 for later components)
            let mut row = zeros(m_tot);
            for (k, c) in cts.reps[j].weight_a.iter().enumerate() {
                row[cts.offsets[j] + k] += c;
            }
            for (k, c) in cts.reps[i].weight_a.iter().enumerate() {
                row[cts.offsets[i] + k] -= c;
            }
            let mut a = &cts.reps[i].weight_b - &cts.reps[j].weight_b;
            if j > i {
                a -= 1;
            }
            cs.push(Constraint::Gt { u: row, a });
        }
        let set = cts
            .set
            .intersect(&PolyhedralSet::from_constraints(m_tot, cs))
            .expect("same dimension");
        let mut weights = zeros(m_tot);
        for (k, c) in cts.reps[i].weight_a.iter().enumerate() {
            weights[cts.offsets[i] + k] = c.clone();
        }
        out.push(SelectedWords {
            pattern: cts.tuple[i],
            set,
            weights,
            shift: cts.reps[i].weight_b.clone(),
        });
    }
    out
}

/// Tuples whose first component is the canonical word of the class:
/// minimal under (weight, pattern index, exponent lex) among the
/// components. Every tuple arises by anchoring the class at one of its
/// coset representatives, and exactly one anchor is canonical, so these
/// restricted sets count each class once across all permissible tuples.
pub fn canonical_anchor_set(cts: &ClassTupleSet) -> PolyhedralSet {
    let m_tot = cts.set.dim();
    let mut acc = cts.set.clone();
    for j in 1..cts.tuple.len() {
        let wrow = |strict: bool| -> Constraint {
            let mut u = zeros(m_tot);
            for (k, c) in cts.reps[j].weight_a.iter().enumerate() {
                u[cts.offsets[j] + k] += c;
            }
            for (k, c) in cts.reps[0].weight_a.iter().enumerate() {
                u[cts.offsets[0] + k] -= c;
            }
            let mut a = &cts.reps[0].weight_b - &cts.reps[j].weight_b;
            if !strict {
                a -= 1;
            }
            Constraint::Gt { u, a }
        };
        let weq = || -> Constraint {
            let Constraint::Gt { u, a } = wrow(true) else { unreachable!() };
            Constraint::Eq { u, a: a }
        };
        let chain = if cts.tuple[j] != cts.tuple[0] {
            // Distinct patterns: the pattern order settles weight ties.
            PolyhedralSet::from_constraints(
                m_tot,
                vec![wrow(cts.tuple[j] < cts.tuple[0])],
            )
        } else {
            let m1 = cts.reps[0].weight_a.len();
            let coord = |p: usize| -> Vec<Int> {
                let mut u = zeros(m_tot);
                u[cts.offsets[j] + p] = Int::one();
                u[cts.offsets[0] + p] = -Int::one();
                u
            };
            let mut chain = PolyhedralSet::from_constraints(m_tot, vec![wrow(true)]);
            for p in 0..=m1 {
                let mut cs = vec![weq()];
                for q in 0..p {
                    cs.push(Constraint::Eq { u: coord(q), a: Int::zero() });
                }
                if p < m1 {
                    cs.push(Constraint::Gt { u: coord(p), a: Int::zero() });
                }
                chain = chain
                    .union(&PolyhedralSet::from_constraints(m_tot, cs))
                    .expect("same dimension");
            }
            chain
        };
        // Dropping provably empty combinations early keeps the disjunct
        // count from multiplying out across components.
        acc = acc.intersect(&chain).expect("same dimension").simplify();
    }
    acc
}

/// Chosen coset representatives for every pattern, grouped by transversal
/// class with that class's twist subgroup.
pub fn twisted_unique_reps(
    group: &Group,
    space: &PatternSpace,
    endo: &Endo,
) -> Result<BTreeMap<usize, (PatternRep, PolyhedralSet)>> {
    let hs = twist_subgroups(group, endo)?;
    let mut by_t: Vec<Vec<usize>> = vec![Vec::new(); group.degree()];
    for (i, p) in space.patterns.iter().enumerate() {
        by_t[p.t].push(i);
    }
    let mut all = BTreeMap::new();
    for (t, pats) in by_t.iter().enumerate() {
        if pats.is_empty() {
            continue;
        }
        all.extend(unique_reps(group, space, &hs[t], pats)?);
    }
    Ok(all)
}

/// Cumulative twisted conjugacy growth series: the coefficient of z^r is
/// the number of twisted classes whose lightest element has weight at
/// most r.
pub fn twisted_growth_series(
    group: &Group,
    space: &PatternSpace,
    endo_name: &str,
) -> Result<RationalSeries> {
    let endo = group.endo(endo_name)?.clone();
    let u = twisted_unique_reps(group, space, &endo)?;
    let live: Vec<usize> = u
        .iter()
        .filter(|(_, (_, s))| !s.disjuncts().is_empty())
        .map(|(&p, _)| p)
        .collect();
    let tuples = permissible_tuples_among(group, space, &endo, &live);
    let mut total = RationalSeries::zero();
    for tup in &tuples {
        let cts = build_class_tuple_set(group, space, &endo, tup, &u)?;
        let canon = canonical_anchor_set(&cts);
        let mut weights = zeros(canon.dim());
        for (k, c) in cts.reps[0].weight_a.iter().enumerate() {
            weights[cts.offsets[0] + k] = c.clone();
        }
        total = total.add(&weighted_series(
            &canon,
            &weights,
            &cts.reps[0].weight_b,
        )?);
    }
    Ok(total.cumulative().reduce())
}

/// Box-bounded check of the structural assumptions behind the counting:
/// no two admissible tuples share a component word, and exactly one
/// component of each tuple is selected.
pub fn verify_tuple_invariants(
    cts: &ClassTupleSet,
    selections: &[SelectedWords],
    bound: i64,
) -> Result<()> {
    let dg = cts.tuple.len();
    let points = cts.set.enumerate_box(bound);
    for i in 0..dg {
        let lo = cts.offsets[i];
        let hi = lo + cts.reps[i].weight_a.len();
        let mut seen: BTreeMap<Vec<Int>, Vec<Int>> = BTreeMap::new();
        for p in &points {
            let word = p[lo..hi].to_vec();
            if let Some(prev) = seen.insert(word, p.clone()) {
                if prev != *p {
                    return Err(Error::InvariantBreach(format!(
                        "two tuples share component {} word",
                        i
                    )));
                }
            }
        }
    }
    for p in &points {
        let hits = selections.iter().filter(|s| s.set.contains(p)).count();
        if hits != 1 {
            return Err(Error::InvariantBreach(format!(
                "tuple selected {} times",
                hits
            )));
        }
    }
    Ok(())
}
