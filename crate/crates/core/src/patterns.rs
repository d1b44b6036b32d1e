//! Patterns and patterned words.
//!
//! The extended generating set splits as X (elements inside Z^n) and Y
//! (elements outside). A pattern is a word over Y of length at most the
//! coset degree D. A patterned word interleaves powers of the X-generators
//! with the letters of the pattern; its exponent vector lives in N^{m},
//! m = (k+1)·r for a pattern of length k, and both evaluation and weight
//! are affine functions of that vector.

use crate::intset::Int;
use crate::vagroup::{mat_mul, mat_vec, Group, GroupElement};
use crate::{Error, Result};
use num::Zero;

pub const DEFAULT_PATTERN_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct Pattern {
    /// Letters as indices into the Y list.
    pub letters: Vec<usize>,
    /// Exponent vector length (|letters|+1)·r.
    pub m: usize,
    pub eval: GroupElement,
    /// Transversal index of the evaluation's coset.
    pub t: usize,
}

#[derive(Debug, Clone)]
pub struct PatternSpace {
    /// X-generators with weights, all in Z^n.
    pub x_gens: Vec<(GroupElement, u32)>,
    /// Y-generators with weights, all outside Z^n.
    pub y_gens: Vec<(GroupElement, u32)>,
    /// n×r matrix whose columns are the Z^n-parts of the X-generators.
    pub delta: Vec<Vec<Int>>,
    pub patterns: Vec<Pattern>,
}

/// Affine data for a pattern and a conjugating transversal element: for a
/// word w with exponents v, t·eval(w)·t^{-1} = (A·v + B)·s and
/// weight(w) = wa·v + wb.
#[derive(Debug, Clone)]
pub struct PatternRep {
    /// Rows A_1..A_n, each of length m.
    pub a: Vec<Vec<Int>>,
    pub b: Vec<Int>,
    /// Target transversal index.
    pub s: usize,
    pub weight_a: Vec<Int>,
    pub weight_b: Int,
}

/// Minimal weight of every nonnegative combination of the generators, up
/// to the budget; Dijkstra over the additive reachability graph.
fn reachable_weights(
    gens: &[(GroupElement, u32)],
    budget: u32,
) -> std::collections::BTreeMap<Vec<Int>, u32> {
    use std::collections::{BTreeMap, BinaryHeap};
    let n = gens.first().map_or(0, |(g, _)| g.x.len());
    let mut dist: BTreeMap<Vec<Int>, u32> = BTreeMap::new();
    let mut heap: BinaryHeap<(std::cmp::Reverse<u32>, Vec<Int>)> = BinaryHeap::new();
    dist.insert(vec![Int::zero(); n], 0);
    heap.push((std::cmp::Reverse(0), vec![Int::zero(); n]));
    while let Some((std::cmp::Reverse(w), v)) = heap.pop() {
        if dist.get(&v).map_or(true, |&b| w > b) {
            continue;
        }
        for (g, gw) in gens {
            let nw = w + gw;
            if nw > budget {
                continue;
            }
            let nv: Vec<Int> = v.iter().zip(&g.x).map(|(a, b)| a + b).collect();
            if dist.get(&nv).map_or(true, |&b| nw < b) {
                dist.insert(nv.clone(), nw);
                heap.push((std::cmp::Reverse(nw), nv));
            }
        }
    }
    dist
}

/// Drop generators that cannot shorten any word: an X-generator already
/// expressible as a no-heavier combination of the kept ones, and a
/// Y-generator equal to (kept X-combination)·(kept Y-generator) at no
/// larger weight. Rewriting letters one at a time shows every element
/// keeps a geodesic patterned word over the reduced sets.
fn prune_dominated(
    mut x_gens: Vec<(GroupElement, u32)>,
    mut y_gens: Vec<(GroupElement, u32)>,
) -> (Vec<(GroupElement, u32)>, Vec<(GroupElement, u32)>) {
    x_gens.sort_by_key(|(g, w)| (*w, g.clone()));
    y_gens.sort_by_key(|(g, w)| (*w, g.clone()));
    let mut kept_x: Vec<(GroupElement, u32)> = Vec::new();
    for (g, w) in x_gens {
        let reach = reachable_weights(&kept_x, w);
        if reach.get(&g.x).map_or(true, |&c| c > w) {
            kept_x.push((g, w));
        }
    }
    let budget = y_gens.iter().map(|(_, w)| *w).max().unwrap_or(0);
    let reach = reachable_weights(&kept_x, budget);
    let mut kept_y: Vec<(GroupElement, u32)> = Vec::new();
    for (g, w) in y_gens {
        let dominated = kept_y.iter().any(|(h, hw)| {
            if h.t != g.t || *hw > w {
                return false;
            }
            let diff: Vec<Int> =
                g.x.iter().zip(&h.x).map(|(a, b)| a - b).collect();
            reach.get(&diff).map_or(false, |&c| c + hw <= w)
        });
        if !dominated {
            kept_y.push((g, w));
        }
    }
    (kept_x, kept_y)
}

pub fn build_pattern_space(group: &Group, cap: usize) -> Result<PatternSpace> {
    let ext = group.extended_generating_set();
    let mut x_gens = Vec::new();
    let mut y_gens = Vec::new();
    for (g, w) in ext {
        if g.t == 0 {
            x_gens.push((g, w));
        } else {
            y_gens.push((g, w));
        }
    }
    let (x_gens, y_gens) = prune_dominated(x_gens, y_gens);
    let d = group.degree();
    let s = y_gens.len();
    let mut count: usize = 1;
    for _ in 0..d {
        count = count
            .checked_mul(s)
            .and_then(|c| c.checked_add(1))
            .unwrap_or(usize::MAX);
        // count = 1 + s + s^2 + ... accumulated via Horner
    }
    if count > cap {
        return Err(Error::SizingCap { got: count, cap });
    }
    let delta: Vec<Vec<Int>> = x_gens.iter().map(|(g, _)| g.x.clone()).collect();
    let r = x_gens.len();
    let mut patterns = Vec::with_capacity(count);
    let mut level: Vec<(Vec<usize>, GroupElement)> = vec![(vec![], group.identity())];
    for len in 0..=d {
        for (letters, eval) in &level {
            patterns.push(Pattern {
                letters: letters.clone(),
                m: (letters.len() + 1) * r,
                eval: eval.clone(),
                t: eval.t,
            });
        }
        if len == d {
            break;
        }
        let mut next = Vec::with_capacity(level.len() * s);
        for (letters, eval) in &level {
            for (yi, (y, _)) in y_gens.iter().enumerate() {
                let mut ls = letters.clone();
                ls.push(yi);
                next.push((ls, group.multiply(eval, y)));
            }
        }
        level = next;
    }
    Ok(PatternSpace { x_gens, y_gens, delta, patterns })
}

impl PatternSpace {
    pub fn r(&self) -> usize {
        self.x_gens.len()
    }

    pub fn affine_rep(&self, group: &Group, pat: usize, t: usize) -> PatternRep {
        let pi = &self.patterns[pat];
        let n = group.n;
        let k = pi.letters.len();
        // Block matrix (T_t·Δ | T_t·T_{y1}·Δ | ... ), T_y depending only on
        // the coset of y.
        let mut prefix = group.t_mats[t].clone();
        let mut cols: Vec<Vec<Int>> = Vec::with_capacity(pi.m);
        cols.extend(mat_mul(&prefix, &self.delta));
        for &yi in &pi.letters {
            let ty = &group.t_mats[self.y_gens[yi].0.t];
            prefix = mat_mul(&prefix, ty);
            cols.extend(mat_mul(&prefix, &self.delta));
        }
        let a: Vec<Vec<Int>> = (0..n)
            .map(|i| cols.iter().map(|c| c[i].clone()).collect())
            .collect();
        let tt = GroupElement { x: vec![Int::zero(); n], t };
        let conj = group.conjugate(&tt, &pi.eval);
        let mut weight_a = Vec::with_capacity(pi.m);
        for _ in 0..=k {
            for (_, w) in &self.x_gens {
                weight_a.push(Int::from(*w));
            }
        }
        let weight_b: Int = pi
            .letters
            .iter()
            .map(|&yi| Int::from(self.y_gens[yi].1))
            .sum();
        PatternRep { a, b: conj.x, s: conj.t, weight_a, weight_b }
    }

    pub fn eval_patterned_word(
        &self,
        group: &Group,
        pat: usize,
        v: &[Int],
    ) -> Result<GroupElement> {
        let pi = &self.patterns[pat];
        if v.len() != pi.m {
            return Err(Error::DimMismatch("exponent vector length".into()));
        }
        let r = self.r();
        let mut g = group.identity();
        for (blk, chunk) in v.chunks(r).enumerate() {
            let x = mat_vec(&self.delta, chunk);
            g = group.multiply(&g, &GroupElement { x, t: 0 });
            if blk < pi.letters.len() {
                g = group.multiply(&g, &self.y_gens[pi.letters[blk]].0);
            }
        }
        Ok(g)
    }

    pub fn word_weight(&self, pat: usize, v: &[Int]) -> Result<Int> {
        let pi = &self.patterns[pat];
        if v.len() != pi.m {
            return Err(Error::DimMismatch("exponent vector length".into()));
        }
        let r = self.r();
        let mut w: Int = pi
            .letters
            .iter()
            .map(|&yi| Int::from(self.y_gens[yi].1))
            .sum();
        for chunk in v.chunks(r) {
            for (e, (_, gw)) in chunk.iter().zip(&self.x_gens) {
                w += e * Int::from(*gw);
            }
        }
        Ok(w)
    }
}
