//! Brute-force enumeration of balls, class partitions and conjugator
//! searches. Everything here works by exhaustive multiplication, so it is
//! slow but trustworthy; the polyhedral pipeline is checked against it.

use crate::relative::class_descriptor;
use crate::vagroup::{Endo, Group, GroupElement};
use crate::Result;
use std::fmt::Write as _;

/// Cumulative ball sizes: entry r counts elements of weight at most r.
pub fn ball_profile(group: &Group, radius: u32) -> Vec<u64> {
    let ball = group.weighted_ball(radius);
    (0..=radius)
        .map(|r| ball.values().filter(|&&w| w <= r).count() as u64)
        .collect()
}

/// Twisted conjugacy class representatives meeting the ball, each with the
/// minimal weight seen in its class.
pub fn class_partition(
    group: &Group,
    endo: &Endo,
    radius: u32,
) -> Result<Vec<(GroupElement, u32)>> {
    let mut reps: Vec<(GroupElement, u32, crate::relative::TwistedClassDescriptor)> = Vec::new();
    for (el, w) in group.weighted_ball(radius) {
        match reps.iter_mut().find(|(_, _, d)| d.contains(&el)) {
            Some((_, mw, _)) => *mw = (*mw).min(w),
            None => {
                let d = class_descriptor(group, endo, &el)?;
                reps.push((el, w, d));
            }
        }
    }
    Ok(reps.into_iter().map(|(el, w, _)| (el, w)).collect())
}

/// Cumulative class counts: entry r counts classes whose minimal weight in
/// the ball is at most r.
pub fn class_profile(group: &Group, endo_name: &str, radius: u32) -> Result<Vec<u64>> {
    let endo = group.endo(endo_name)?.clone();
    let reps = class_partition(group, &endo, radius)?;
    Ok((0..=radius)
        .map(|r| reps.iter().filter(|(_, w)| *w <= r).count() as u64)
        .collect())
}

/// Cumulative counts of ball elements lying in the class of g.
pub fn relative_profile(
    group: &Group,
    endo_name: &str,
    g: &GroupElement,
    radius: u32,
) -> Result<Vec<u64>> {
    let endo = group.endo(endo_name)?.clone();
    let desc = class_descriptor(group, &endo, g)?;
    let ball = group.weighted_ball(radius);
    Ok((0..=radius)
        .map(|r| {
            ball.iter()
                .filter(|(el, &w)| w <= r && desc.contains(el))
                .count() as u64
        })
        .collect())
}

/// Search for an explicit conjugator c with c·a·phi(c)^{-1} = b among all
/// elements of weight at most search_radius. Sound but incomplete; used as
/// a second opinion on the lattice membership test.
pub fn conjugate_by_search(
    group: &Group,
    endo: &Endo,
    a: &GroupElement,
    b: &GroupElement,
    search_radius: u32,
) -> bool {
    group.weighted_ball(search_radius).keys().any(|c| {
        let lhs = group.multiply(
            &group.multiply(c, a),
            &group.invert(&group.apply_endo(endo, c)),
        );
        &lhs == b
    })
}

/// Render a cumulative profile as two-column CSV.
pub fn profile_csv(values: &[u64]) -> String {
    let mut out = String::from("radius,count\n");
    for (r, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{r},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::Int;
    use crate::patterns::{build_pattern_space, DEFAULT_PATTERN_CAP};
    use crate::relative::{is_twisted_conjugate, relative_series};
    use crate::vagroup::bundled;
    use num::Zero;

    fn load(name: &str) -> Group {
        Group::from_json_str(bundled(name).unwrap()).unwrap()
    }

    #[test]
    fn zn_ball_profile() {
        let g = load("zn");
        assert_eq!(ball_profile(&g, 2), vec![1, 5, 13]);
    }

    #[test]
    fn dihedral_ball_profile() {
        let g = load("dihedral");
        assert_eq!(ball_profile(&g, 1), vec![1, 4]);
    }

    #[test]
    fn z_negation_class_profile() {
        let g = load("z_phi_neg");
        assert_eq!(class_profile(&g, "neg", 3).unwrap(), vec![1, 2, 2, 2]);
    }

    #[test]
    fn z_doubling_class_profile() {
        let g = load("z_phi_neg");
        assert_eq!(class_profile(&g, "dbl", 3).unwrap(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn conjugator_search_agrees_with_membership() {
        for name in ["z_phi_neg", "dihedral"] {
            let g = load(name);
            for endo_name in g.endos.keys() {
                let endo = g.endo(endo_name).unwrap().clone();
                let ball: Vec<GroupElement> =
                    g.weighted_ball(2).into_keys().collect();
                for a in &ball {
                    for b in &ball {
                        // a conjugator moving one small element to another
                        // never needs to be large in these examples
                        let found = conjugate_by_search(&g, &endo, a, b, 6);
                        let member =
                            is_twisted_conjugate(&g, &endo, a, b).unwrap();
                        assert_eq!(found, member, "{name} {endo_name} {a:?} {b:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn relative_profile_matches_series() {
        let g = load("z_phi_neg");
        let sp = build_pattern_space(&g, DEFAULT_PATTERN_CAP).unwrap();
        let zero = GroupElement { x: vec![Int::zero()], t: 0 };
        let s = relative_series(&g, &sp, "neg", &zero).unwrap();
        let coeffs = s.expand(6).unwrap();
        let profile = relative_profile(&g, "neg", &zero, 5).unwrap();
        for (c, p) in coeffs.iter().zip(&profile) {
            assert_eq!(c, &Int::from(*p));
        }
    }

    #[test]
    fn csv_rendering() {
        assert_eq!(profile_csv(&[1, 4]), "radius,count\n0,1\n1,4\n");
    }
}
