//! Synthetic inputs: a family that is quadratic for single-vertex merging,
//! and uniform random bipartite graphs.

use std::collections::HashSet;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{random_permute, BipartiteGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseSpec {
    pub n_per_instance: usize,
    pub copies: usize,
    pub seed: u64,
}

impl WorstCaseSpec {
    pub fn new(n_per_instance: usize, seed: u64) -> Self {
        WorstCaseSpec { n_per_instance, copies: 64, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_instance < 8 || !self.n_per_instance.is_power_of_two() {
            return Err(Error::InvalidSpec(format!(
                "n_per_instance must be a power of two >= 8, got {}",
                self.n_per_instance
            )));
        }
        if self.copies == 0 {
            return Err(Error::InvalidSpec("copies must be positive".into()));
        }
        Ok(())
    }

    pub fn total_vertices(&self) -> usize {
        self.n_per_instance * self.copies
    }
}

/// Each copy of size `n` holds a chain of `k = max(3, n/8)` left vertices
/// `u_1..u_k` over right boundaries `b_1..b_k`, a left hub `h`, and padding:
///
/// - `u_1 ~ {b_1, b_2}` and `u_k ~ {b_{k-1}, b_k}` are the only explicit
///   degree-2 vertices;
/// - `u_i ~ {b_{i-1}, b_i, b_{i+1}}` for `1 < i < k`, so `u_i` drops to
///   degree 2 only once `b_{i-1}` and `b_i` have been merged;
/// - `h ~ b_j` for every `j`, keeping every boundary at degree 3 or more;
/// - the remaining `n - 2k - 1` vertices form disjoint edges plus one
///   isolated right vertex, so each side has `n/2` vertices.
///
/// Single-vertex merging therefore walks the chain one step at a time
/// from both ends, re-reading the ever longer merged adjacency each step.
/// Copies are disjoint; ids are shuffled by `seed`.
pub fn gen_worst_case(spec: &WorstCaseSpec) -> Result<BipartiteGraph> {
    spec.validate()?;
    let n = spec.n_per_instance;
    let half = n / 2;
    let k = (n / 8).max(3);
    let mut edges = Vec::with_capacity(spec.copies * (4 * k + half));
    for c in 0..spec.copies {
        let lo = (c * half) as u32;
        let u = |i: usize| lo + (i - 1) as u32;
        let b = |j: usize| lo + (j - 1) as u32;
        let h = lo + k as u32;
        for i in 1..=k {
            if i > 1 {
                edges.push((u(i), b(i - 1)));
            }
            edges.push((u(i), b(i)));
            if i < k {
                edges.push((u(i), b(i + 1)));
            }
        }
        for j in 1..=k {
            edges.push((h, b(j)));
        }
        for p in (k + 1) as u32..half as u32 {
            edges.push((lo + p, lo + p - 1));
        }
    }
    let nl = spec.copies * half;
    let g = BipartiteGraph::from_edges(nl, nl, &edges)?;
    Ok(random_permute(&g, spec.seed))
}

/// `m` distinct edges drawn uniformly from the `n_left * n_right` grid.
///
/// Dense requests sample the complement instead, so the expected number of
/// draws stays below twice the number kept.
pub fn gen_random_bipartite(n_left: usize, n_right: usize, m: usize, seed: u64) -> Result<BipartiteGraph> {
    let cells = (n_left as u128) * (n_right as u128);
    if m as u128 > cells {
        return Err(Error::TooManyEdges { m, max: cells.min(usize::MAX as u128) as usize });
    }
    let cells = cells as u64;
    let mut rng = SplitMix64::seed_from_u64(seed);
    let complement = (m as u64) * 2 > cells;
    let want = if complement { cells - m as u64 } else { m as u64 };
    let mut picked = HashSet::with_capacity(want as usize);
    let mut order = Vec::with_capacity(want as usize);
    while (order.len() as u64) < want {
        let x = rng.next_u64() % cells;
        if picked.insert(x) {
            order.push(x);
        }
    }
    let split = |x: u64| ((x / n_right as u64) as u32, (x % n_right as u64) as u32);
    let edges: Vec<(u32, u32)> = if complement {
        (0..cells).filter(|x| !picked.contains(x)).map(split).collect()
    } else {
        order.into_iter().map(split).collect()
    };
    BipartiteGraph::from_edges(n_left, n_right, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(WorstCaseSpec::new(4, 0).validate().is_err());
        assert!(WorstCaseSpec::new(24, 0).validate().is_err());
        assert!(WorstCaseSpec { n_per_instance: 8, copies: 0, seed: 0 }.validate().is_err());
        assert_eq!(WorstCaseSpec::new(16, 0).total_vertices(), 1024);
    }

    #[test]
    fn smallest_instance_census() {
        let g = gen_worst_case(&WorstCaseSpec { n_per_instance: 8, copies: 1, seed: 3 }).unwrap();
        assert_eq!(g.n(), 8);
        assert_eq!((g.n_left(), g.n_right()), (4, 4));
        let (l, r) = g.degree_multisets();
        assert_eq!(l, vec![2, 2, 3, 3]);
        assert_eq!(r, vec![0, 3, 3, 4]);
        let g = gen_worst_case(&WorstCaseSpec { n_per_instance: 64, copies: 1, seed: 3 }).unwrap();
        let (l, r) = g.degree_multisets();
        // k = 8: two chain ends, six chain interiors, the hub, 23 padding edges.
        assert_eq!(l.iter().filter(|&&d| d == 2).count(), 2);
        assert_eq!(l.iter().filter(|&&d| d == 1).count(), 23);
        assert_eq!(l.last(), Some(&8));
        assert_eq!(r.iter().filter(|&&d| d == 0).count(), 1);
        g.check_invariants().unwrap();
    }

    #[test]
    fn copies_and_reproducibility() {
        let s = WorstCaseSpec { n_per_instance: 32, copies: 5, seed: 9 };
        let a = gen_worst_case(&s).unwrap();
        assert_eq!(a, gen_worst_case(&s).unwrap());
        assert_eq!(a.n(), 160);
        // k = 4: 3k - 2 chain edges, k hub edges, 11 padding edges per copy.
        assert_eq!(a.m(), 5 * (3 * 4 - 2 + 4 + 11));
        assert_ne!(a, gen_worst_case(&WorstCaseSpec { seed: 10, ..s }).unwrap());
    }

    #[test]
    fn random_graphs() {
        let k = gen_random_bipartite(3, 3, 9, 1).unwrap();
        assert_eq!(k.m(), 9);
        assert_eq!(gen_random_bipartite(5, 5, 0, 1).unwrap().m(), 0);
        let g = gen_random_bipartite(20, 30, 100, 7).unwrap();
        assert_eq!(g.m(), 100);
        assert_eq!(g, gen_random_bipartite(20, 30, 100, 7).unwrap());
        assert_eq!(gen_random_bipartite(10, 10, 80, 2).unwrap().m(), 80);
        assert!(matches!(gen_random_bipartite(2, 2, 5, 0), Err(Error::TooManyEdges { m: 5, max: 4 })));
    }
}
