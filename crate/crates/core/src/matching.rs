//! Matchings, an exact maximum-matching solver, and independent oracles.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, BipartiteView};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    mate_left: Vec<Option<u32>>,
    mate_right: Vec<Option<u32>>,
    size: usize,
}

impl Matching {
    pub fn new(n_left: usize, n_right: usize) -> Self {
        Matching { mate_left: vec![None; n_left], mate_right: vec![None; n_right], size: 0 }
    }

    pub fn n_left(&self) -> usize {
        self.mate_left.len()
    }

    pub fn n_right(&self) -> usize {
        self.mate_right.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mate_of_left(&self, u: usize) -> Option<u32> {
        self.mate_left[u]
    }

    pub fn mate_of_right(&self, v: usize) -> Option<u32> {
        self.mate_right[v]
    }

    /// Adds `(u, v)` if both endpoints are free.
    pub fn add(&mut self, u: u32, v: u32) -> bool {
        if self.mate_left[u as usize].is_some() || self.mate_right[v as usize].is_some() {
            return false;
        }
        self.mate_left[u as usize] = Some(v);
        self.mate_right[v as usize] = Some(u);
        self.size += 1;
        true
    }

    /// Matched pairs in left-id order.
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.mate_left.iter().enumerate().filter_map(|(u, m)| m.map(|v| (u as u32, v)))
    }

    /// Builds a matching from raw mate arrays without any checks, so that
    /// [`verify_matching`] can be exercised on corrupt input.
    pub fn from_raw(mate_left: Vec<Option<u32>>, mate_right: Vec<Option<u32>>) -> Self {
        let size = mate_left.iter().filter(|m| m.is_some()).count();
        Matching { mate_left, mate_right, size }
    }
}

/// Hopcroft-Karp: breadth-first layering from all free left vertices, then
/// vertex-disjoint shortest augmenting paths along the layers. The depth
/// search is iterative so long paths cannot overflow the stack.
pub fn maximum_matching<G: BipartiteView + ?Sized>(g: &G) -> Matching {
    const INF: u32 = u32::MAX;
    let (nl, nr) = (g.n_left(), g.n_right());
    let mut mate_l = vec![INF; nl];
    let mut mate_r = vec![INF; nr];
    let mut dist = vec![INF; nl];
    let mut next = vec![0usize; nl];
    let mut queue = VecDeque::new();
    let mut stack: Vec<u32> = Vec::new();

    loop {
        queue.clear();
        for u in 0..nl {
            if mate_l[u] == INF {
                dist[u] = 0;
                queue.push_back(u as u32);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u as usize) {
                let w = mate_r[v as usize];
                if w == INF {
                    found = true;
                } else if dist[w as usize] == INF {
                    dist[w as usize] = dist[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }

        next.iter_mut().for_each(|n| *n = 0);
        for root in 0..nl {
            if mate_l[root] != INF || dist[root] != 0 {
                continue;
            }
            stack.clear();
            stack.push(root as u32);
            while let Some(&u) = stack.last() {
                let u = u as usize;
                let adj = g.neighbors(u);
                if next[u] == adj.len() {
                    dist[u] = INF;
                    stack.pop();
                    continue;
                }
                let v = adj[next[u]];
                next[u] += 1;
                let w = mate_r[v as usize];
                if w == INF {
                    for &x in stack.iter() {
                        let x = x as usize;
                        let vx = g.neighbors(x)[next[x] - 1];
                        mate_l[x] = vx;
                        mate_r[vx as usize] = x as u32;
                    }
                    stack.clear();
                } else if dist[w as usize] == dist[u].wrapping_add(1) {
                    stack.push(w);
                }
            }
        }
    }

    let mut m = Matching::new(nl, nr);
    for (u, &v) in mate_l.iter().enumerate() {
        if v != INF {
            m.add(u as u32, v);
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub valid: bool,
    pub size: usize,
    pub violations: Vec<String>,
}

/// Checks edge membership, mate symmetry and side sizes of `m` over `g`.
pub fn verify_matching(g: &BipartiteGraph, m: &Matching) -> VerifyReport {
    let mut violations = Vec::new();
    if m.n_left() != g.n_left() || m.n_right() != g.n_right() {
        violations.push(format!(
            "matching is over {}x{} but graph is {}x{}",
            m.n_left(),
            m.n_right(),
            g.n_left(),
            g.n_right()
        ));
        return VerifyReport { valid: false, size: 0, violations };
    }
    let mut size = 0;
    for u in 0..m.n_left() {
        let Some(v) = m.mate_of_left(u) else { continue };
        if v as usize >= g.n_right() {
            violations.push(format!("left {u} matched to out-of-range right {v}"));
            continue;
        }
        size += 1;
        if !g.has_edge(u, v as usize) {
            violations.push(format!("({u}, {v}) is not an edge"));
        }
        if m.mate_of_right(v as usize) != Some(u as u32) {
            violations.push(format!("left {u} -> right {v} but right {v} -> {:?}", m.mate_of_right(v as usize)));
        }
    }
    for v in 0..m.n_right() {
        if let Some(u) = m.mate_of_right(v) {
            if u as usize >= g.n_left() || m.mate_of_left(u as usize) != Some(v as u32) {
                violations.push(format!("right {v} -> left {u} is not reciprocated"));
            }
        }
    }
    if size != m.size() {
        violations.push(format!("declared size {} but {size} matched left vertices", m.size()));
    }
    VerifyReport { valid: violations.is_empty(), size, violations }
}

/// Verifies raw `(left, right)` pairs, also reporting out-of-range ids and
/// vertices that occur in more than one pair.
pub fn verify_pairs(g: &BipartiteGraph, pairs: &[(u32, u32)]) -> VerifyReport {
    let mut m = Matching::new(g.n_left(), g.n_right());
    let mut violations = Vec::new();
    for &(u, v) in pairs {
        if u as usize >= g.n_left() || v as usize >= g.n_right() {
            violations.push(format!("({u}, {v}) is out of range for {}x{}", g.n_left(), g.n_right()));
        } else if !m.add(u, v) {
            violations.push(format!("({u}, {v}) reuses a matched vertex"));
        }
    }
    let mut rep = verify_matching(g, &m);
    violations.append(&mut rep.violations);
    rep.valid = violations.is_empty();
    rep.violations = violations;
    rep
}

/// Exhaustive over edge subsets (include/exclude per edge), cut off when
/// the remaining edges cannot beat the best found. Only for tiny graphs.
pub fn exhaustive_max(g: &BipartiteGraph) -> usize {
    struct Search<'a> {
        edges: &'a [(u32, u32)],
        used_l: Vec<bool>,
        used_r: Vec<bool>,
        best: usize,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, cur: usize) {
            self.best = self.best.max(cur);
            if i == self.edges.len() || cur + (self.edges.len() - i) <= self.best {
                return;
            }
            let (u, v) = (self.edges[i].0 as usize, self.edges[i].1 as usize);
            if !self.used_l[u] && !self.used_r[v] {
                self.used_l[u] = true;
                self.used_r[v] = true;
                self.go(i + 1, cur + 1);
                self.used_l[u] = false;
                self.used_r[v] = false;
            }
            self.go(i + 1, cur);
        }
    }
    let edges: Vec<_> = g.edges().collect();
    let mut s = Search { edges: &edges, used_l: vec![false; g.n_left()], used_r: vec![false; g.n_right()], best: 0 };
    s.go(0, 0);
    s.best
}

/// One augmenting depth-first search per left vertex.
pub fn kuhn_max(g: &BipartiteGraph) -> usize {
    fn try_kuhn(g: &BipartiteGraph, u: usize, seen: &mut [bool], mate_r: &mut [Option<usize>]) -> bool {
        for &v in g.left_neighbors(u) {
            let v = v as usize;
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if mate_r[v].is_none() || try_kuhn(g, mate_r[v].unwrap(), seen, mate_r) {
                mate_r[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut mate_r = vec![None; g.n_right()];
    let mut size = 0;
    for u in 0..g.n_left() {
        let mut seen = vec![false; g.n_right()];
        if try_kuhn(g, u, &mut seen, &mut mate_r) {
            size += 1;
        }
    }
    size
}

pub const EXHAUSTIVE_EDGE_LIMIT: usize = 24;
pub const AUGMENTING_SIDE_LIMIT: usize = 40;

/// Exact maximum matching size by a method unrelated to [`maximum_matching`].
pub fn brute_force_max(g: &BipartiteGraph) -> Result<usize> {
    if g.n_left() <= AUGMENTING_SIDE_LIMIT && g.n_right() <= AUGMENTING_SIDE_LIMIT {
        Ok(kuhn_max(g))
    } else if g.m() <= EXHAUSTIVE_EDGE_LIMIT {
        Ok(exhaustive_max(g))
    } else {
        Err(Error::OracleLimit(format!("{} edges, {}x{} vertices", g.m(), g.n_left(), g.n_right())))
    }
}
