//! Immutable bipartite graph in compressed adjacency form.
//!
//! Left vertices are `0..n_left`, right vertices are `0..n_right`. Both
//! directions are stored so either side can be traversed without a scan.
//! Adjacency lists are sorted by target id, which fixes the traversal order
//! used by every downstream algorithm.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::error::{Error, Result};

/// Read-only neighbor access shared by [`BipartiteGraph`] and kernel views.
pub trait BipartiteView {
    fn n_left(&self) -> usize;
    fn n_right(&self) -> usize;
    /// Right-side neighbors of left vertex `u`.
    fn neighbors(&self, u: usize) -> &[u32];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_left: usize,
    n_right: usize,
    left_offsets: Vec<usize>,
    left_targets: Vec<u32>,
    right_offsets: Vec<usize>,
    right_targets: Vec<u32>,
}

impl BipartiteGraph {
    /// Builds a graph from `(left, right)` pairs. Duplicates are collapsed.
    pub fn from_edges(n_left: usize, n_right: usize, edges: &[(u32, u32)]) -> Result<Self> {
        for &(u, v) in edges {
            if u as usize >= n_left {
                return Err(Error::IdOutOfRange { id: u as usize, n: n_left });
            }
            if v as usize >= n_right {
                return Err(Error::IdOutOfRange { id: v as usize, n: n_right });
            }
        }
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Ok(Self::from_sorted_unique(n_left, n_right, &sorted))
    }

    fn from_sorted_unique(n_left: usize, n_right: usize, edges: &[(u32, u32)]) -> Self {
        let (left_offsets, left_targets) = csr(n_left, edges.iter().map(|&(u, v)| (u, v)));
        // Edges are sorted by (u, v), so bucketing by v keeps each right list sorted by u.
        let (right_offsets, right_targets) = csr(n_right, edges.iter().map(|&(u, v)| (v, u)));
        BipartiteGraph { n_left, n_right, left_offsets, left_targets, right_offsets, right_targets }
    }

    pub fn empty(n_left: usize, n_right: usize) -> Self {
        Self::from_sorted_unique(n_left, n_right, &[])
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn n(&self) -> usize {
        self.n_left + self.n_right
    }

    pub fn m(&self) -> usize {
        self.left_targets.len()
    }

    pub fn left_neighbors(&self, u: usize) -> &[u32] {
        &self.left_targets[self.left_offsets[u]..self.left_offsets[u + 1]]
    }

    pub fn right_neighbors(&self, v: usize) -> &[u32] {
        &self.right_targets[self.right_offsets[v]..self.right_offsets[v + 1]]
    }

    pub fn left_degree(&self, u: usize) -> usize {
        self.left_offsets[u + 1] - self.left_offsets[u]
    }

    pub fn right_degree(&self, v: usize) -> usize {
        self.right_offsets[v + 1] - self.right_offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n_left && v < self.n_right && self.left_neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// All edges in `(left, right)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_left).flat_map(move |u| self.left_neighbors(u).iter().map(move |&v| (u as u32, v)))
    }

    /// Sorted degree sequences of the left and right sides.
    pub fn degree_multisets(&self) -> (Vec<usize>, Vec<usize>) {
        let mut l: Vec<usize> = (0..self.n_left).map(|u| self.left_degree(u)).collect();
        let mut r: Vec<usize> = (0..self.n_right).map(|v| self.right_degree(v)).collect();
        l.sort_unstable();
        r.sort_unstable();
        (l, r)
    }

    /// Full scan of the structural invariants. Returns the first violation.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.left_targets.len() != self.right_targets.len() {
            return Err(format!(
                "left entries {} != right entries {}",
                self.left_targets.len(),
                self.right_targets.len()
            ));
        }
        for u in 0..self.n_left {
            let adj = self.left_neighbors(u);
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("left {u}: adjacency not strictly sorted"));
            }
            for &v in adj {
                if v as usize >= self.n_right {
                    return Err(format!("left {u}: target {v} out of range"));
                }
                if self.right_neighbors(v as usize).binary_search(&(u as u32)).is_err() {
                    return Err(format!("edge ({u},{v}) missing from right view"));
                }
            }
        }
        for v in 0..self.n_right {
            let adj = self.right_neighbors(v);
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(format!("right {v}: adjacency not strictly sorted"));
            }
            for &u in adj {
                if u as usize >= self.n_left {
                    return Err(format!("right {v}: target {u} out of range"));
                }
                if !self.has_edge(u as usize, v) {
                    return Err(format!("edge ({u},{v}) missing from left view"));
                }
            }
        }
        Ok(())
    }

    /// Relabels left ids by `left_perm[old] = new` and right ids likewise.
    pub fn relabel(&self, left_perm: &[u32], right_perm: &[u32]) -> Self {
        let mut edges: Vec<(u32, u32)> =
            self.edges().map(|(u, v)| (left_perm[u as usize], right_perm[v as usize])).collect();
        edges.sort_unstable();
        Self::from_sorted_unique(self.n_left, self.n_right, &edges)
    }
}

impl BipartiteView for BipartiteGraph {
    fn n_left(&self) -> usize {
        self.n_left
    }

    fn n_right(&self) -> usize {
        self.n_right
    }

    fn neighbors(&self, u: usize) -> &[u32] {
        self.left_neighbors(u)
    }
}

fn csr(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; n + 1];
    for (s, _) in pairs.clone() {
        offsets[s as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[n]];
    for (s, t) in pairs {
        targets[fill[s as usize]] = t;
        fill[s as usize] += 1;
    }
    (offsets, targets)
}

/// Splits each vertex of a directed graph into an out-copy (left) and an
/// in-copy (right); arc `i -> j` becomes edge `(i, j)`. Self-loops are kept.
pub fn bipartite_from_directed(edges: &[(u32, u32)], n: usize) -> Result<BipartiteGraph> {
    BipartiteGraph::from_edges(n, n, edges)
}

/// Seeded uniform permutation of `0..n` as `perm[old] = new`.
///
/// Generator: SplitMix64 seeded with `seed`. Shuffle: Fisher-Yates from the
/// top, `j = next_u64() % (i + 1)` for `i = n-1 down to 1`, swapping
/// positions `i` and `j` of the identity array.
pub fn seeded_permutation(n: usize, rng: &mut SplitMix64) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

/// Independently permutes the left and right ids. The left permutation is
/// drawn first from the same generator, then the right one.
pub fn random_permute(g: &BipartiteGraph, seed: u64) -> BipartiteGraph {
    let (lp, rp) = permutation_pair(g.n_left(), g.n_right(), seed);
    g.relabel(&lp, &rp)
}

/// The left and right permutations [`random_permute`] applies.
pub fn permutation_pair(n_left: usize, n_right: usize, seed: u64) -> (Vec<u32>, Vec<u32>) {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let lp = seeded_permutation(n_left, &mut rng);
    let rp = seeded_permutation(n_right, &mut rng);
    (lp, rp)
}
