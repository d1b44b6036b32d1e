//! Relative growth of a single twisted conjugacy class.
//!
//! A class is a union over the transversal of lattice cosets, one per
//! conjugator coset Z^n·t. Counting its elements by weight reduces to
//! intersecting the geodesic normal forms with the polyhedral membership
//! condition of those lattice cosets.

use crate::cosetreps::{unique_reps, weighted_series, SubgroupH};
use crate::intset::{lattice_coset_membership, Constraint, Int, PolyhedralSet};
use crate::patterns::PatternSpace;
use crate::ratfun::RationalSeries;
use crate::twisted::twist_subgroups;
use crate::vagroup::{Endo, Group, GroupElement};
use crate::Result;
use num::Zero;

fn zeros(k: usize) -> Vec<Int> {
    vec![Int::zero(); k]
}

/// One lattice coset of the class: everything twisted-conjugate to the
/// base by an element of Z^n·t lies in shift + H inside coset target_t.
#[derive(Debug, Clone)]
pub struct CosetPiece {
    pub target_t: usize,
    pub h: SubgroupH,
    pub shift: Vec<Int>,
}

#[derive(Debug, Clone)]
pub struct TwistedClassDescriptor {
    pub base: GroupElement,
    pub pieces: Vec<CosetPiece>,
}

/// Decompose the class of g into its transversal pieces: conjugating the
/// base by t fixes the piece's coset and shift, conjugating by Z^n then
/// sweeps out the twist subgroup of that coset.
pub fn class_descriptor(
    group: &Group,
    endo: &Endo,
    g: &GroupElement,
) -> Result<TwistedClassDescriptor> {
    let hs = twist_subgroups(group, endo)?;
    let mut pieces = Vec::with_capacity(group.degree());
    for t in 0..group.degree() {
        let te = GroupElement { x: zeros(group.n), t };
        let c = group.multiply(
            &group.multiply(&te, g),
            &group.invert(&group.apply_endo(endo, &te)),
        );
        pieces.push(CosetPiece {
            target_t: c.t,
            h: hs[c.t].clone(),
            shift: c.x,
        });
    }
    Ok(TwistedClassDescriptor { base: g.clone(), pieces })
}

impl TwistedClassDescriptor {
    pub fn contains(&self, el: &GroupElement) -> bool {
        self.pieces.iter().any(|p| {
            el.t == p.target_t
                && lattice_coset_membership(&el.x, &p.h.basis, &p.shift)
        })
    }
}

pub fn is_twisted_conjugate(
    group: &Group,
    endo: &Endo,
    a: &GroupElement,
    b: &GroupElement,
) -> Result<bool> {
    Ok(class_descriptor(group, endo, a)?.contains(b))
}

/// Cumulative relative growth series of the class of g: the coefficient
/// of z^r counts the class elements of weight at most r.
pub fn relative_series(
    group: &Group,
    space: &PatternSpace,
    endo_name: &str,
    g: &GroupElement,
) -> Result<RationalSeries> {
    let h0 = SubgroupH::trivial(group.n);
    let pats: Vec<usize> = (0..space.patterns.len()).collect();
    let reps = unique_reps(group, space, &h0, &pats)?;
    relative_series_from_reps(group, space, endo_name, g, &reps)
}

/// Same as relative_series but reusing precomputed unique geodesic
/// representatives (they only depend on group and space, so callers
/// iterating over many class representatives can share them).
pub fn relative_series_from_reps(
    group: &Group,
    space: &PatternSpace,
    endo_name: &str,
    g: &GroupElement,
    reps: &std::collections::BTreeMap<usize, (crate::patterns::PatternRep, PolyhedralSet)>,
) -> Result<RationalSeries> {
    let endo = group.endo(endo_name)?.clone();
    let desc = class_descriptor(group, &endo, g)?;
    let n = group.n;
    let mut total = RationalSeries::zero();
    for (pi, (rep, u)) in reps {
        let tpi = space.patterns[*pi].t;
        if u.disjuncts().is_empty()
            || desc.pieces.iter().all(|p| p.target_t != tpi)
        {
            continue;
        }
        let m = rep.weight_a.len();
        let mut cond = PolyhedralSet::empty(m);
        for piece in desc.pieces.iter().filter(|p| p.target_t == tpi) {
            // A·v + B in shift + H, with the H-coordinates eliminated.
            let d = piece.h.d();
            let dim = m + d;
            let mut cs = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = zeros(dim);
                for (k, c) in rep.a[i].iter().enumerate() {
                    row[k] = c.clone();
                }
                for (k, hb) in piece.h.basis.iter().enumerate() {
                    row[m + k] = -hb[i].clone();
                }
                cs.push(Constraint::Eq {
                    u: row,
                    a: &piece.shift[i] - &rep.b[i],
                });
            }
            let piece_set = PolyhedralSet::from_constraints(dim, cs)
                .project(&(0..m).collect::<Vec<_>>());
            cond = cond.union(&piece_set)?;
        }
        let set = u.intersect(&cond)?;
        total = total.add(&weighted_series(&set, &rep.weight_a, &rep.weight_b)?);
    }
    Ok(total.cumulative().reduce())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{build_pattern_space, DEFAULT_PATTERN_CAP};
    use crate::vagroup::bundled;

    fn load(name: &str) -> Group {
        Group::from_json_str(bundled(name).unwrap()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    fn el(x: &[i64], t: usize) -> GroupElement {
        GroupElement { x: ints(x), t }
    }

    #[test]
    fn twisted_conjugacy_is_reflexive() {
        for name in ["zn", "z_phi_neg", "klein"] {
            let g = load(name);
            for endo_name in g.endos.keys() {
                let endo = g.endo(endo_name).unwrap().clone();
                for (a, _) in g.weighted_ball(3) {
                    assert!(is_twisted_conjugate(&g, &endo, &a, &a).unwrap());
                }
            }
        }
    }

    #[test]
    fn twisted_conjugacy_is_symmetric() {
        for name in ["z_phi_neg", "klein"] {
            let g = load(name);
            for endo_name in g.endos.keys() {
                let endo = g.endo(endo_name).unwrap().clone();
                let ball: Vec<GroupElement> =
                    g.weighted_ball(3).into_keys().collect();
                for a in &ball {
                    for b in &ball {
                        assert_eq!(
                            is_twisted_conjugate(&g, &endo, a, b).unwrap(),
                            is_twisted_conjugate(&g, &endo, b, a).unwrap(),
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn z_negation_cosets_of_two_z() {
        let g = load("z_phi_neg");
        let endo = g.endo("neg").unwrap().clone();
        assert!(is_twisted_conjugate(&g, &endo, &el(&[0], 0), &el(&[2], 0)).unwrap());
        assert!(!is_twisted_conjugate(&g, &endo, &el(&[0], 0), &el(&[1], 0)).unwrap());
    }

    #[test]
    fn z_negation_class_of_zero_counts_even_integers() {
        let g = load("z_phi_neg");
        let sp = build_pattern_space(&g, DEFAULT_PATTERN_CAP).unwrap();
        let s = relative_series(&g, &sp, "neg", &el(&[0], 0)).unwrap();
        assert_eq!(s.expand(6).unwrap(), ints(&[1, 1, 3, 3, 5, 5]));
    }

    #[test]
    fn abelian_identity_class_is_one_element() {
        let g = load("zn");
        let sp = build_pattern_space(&g, DEFAULT_PATTERN_CAP).unwrap();
        let s = relative_series(&g, &sp, "id", &el(&[1, 0], 0)).unwrap();
        assert_eq!(s.expand(6).unwrap(), ints(&[0, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn class_descriptor_of_zero_is_single_even_coset() {
        let g = load("z_phi_neg");
        let endo = g.endo("neg").unwrap().clone();
        let d = class_descriptor(&g, &endo, &el(&[0], 0)).unwrap();
        assert_eq!(d.pieces.len(), 1);
        assert_eq!(d.pieces[0].h.basis, vec![ints(&[2])]);
        assert_eq!(d.pieces[0].shift, ints(&[0]));
    }

    #[test]
    fn series_agrees_for_conjugate_representatives() {
        let g = load("klein");
        let sp = build_pattern_space(&g, DEFAULT_PATTERN_CAP).unwrap();
        let endo = g.endo("id").unwrap().clone();
        let a = el(&[1, 0], 0);
        let b = el(&[-1, 0], 0);
        assert!(is_twisted_conjugate(&g, &endo, &a, &b).unwrap());
        let h0 = SubgroupH::trivial(g.n);
        let pats: Vec<usize> = (0..sp.patterns.len()).collect();
        let ureps = unique_reps(&g, &sp, &h0, &pats).unwrap();
        let sa = relative_series_from_reps(&g, &sp, "id", &a, &ureps).unwrap();
        let sb = relative_series_from_reps(&g, &sp, "id", &b, &ureps).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn classes_partition_the_ball() {
        for (name, endo_name) in [("z_phi_neg", "neg"), ("klein", "id"), ("klein", "flip")] {
            let g = load(name);
            let sp = build_pattern_space(&g, DEFAULT_PATTERN_CAP).unwrap();
            let h0 = SubgroupH::trivial(g.n);
            let pats: Vec<usize> = (0..sp.patterns.len()).collect();
            let ureps = unique_reps(&g, &sp, &h0, &pats).unwrap();
            let endo = g.endo(endo_name).unwrap().clone();
            let radius = 4u32;
            let ball = g.weighted_ball(radius);
            let mut reps: Vec<GroupElement> = Vec::new();
            for e in ball.keys() {
                if !reps
                    .iter()
                    .any(|r| is_twisted_conjugate(&g, &endo, r, e).unwrap())
                {
                    reps.push(e.clone());
                }
            }
            let mut sums = vec![Int::zero(); radius as usize + 1];
            for r in &reps {
                let s = relative_series_from_reps(&g, &sp, endo_name, r, &ureps).unwrap();
                let coeffs = s.expand(radius as usize + 1).unwrap();
                for (acc, c) in sums.iter_mut().zip(&coeffs) {
                    *acc += c;
                }
            }
            for r in 0..=radius {
                let count =
                    ball.values().filter(|&&w| w <= r).count();
                assert_eq!(sums[r as usize], Int::from(count as i64), "{name} {endo_name} r={r}");
            }
        }
    }
}
