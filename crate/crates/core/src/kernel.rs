//! Karp-Sipser reduction by multi-vertex merging.
//!
//! Rule 1 matches a degree-1 vertex with its neighbor and deletes both.
//! Rule 2 deletes a degree-2 vertex and merges its two neighbors. Instead of
//! applying Rule 2 one vertex at a time, a search grows a set of mergeable
//! vertices (`hat`) and their boundary (`tilde`) from one explicit degree-2
//! vertex: a vertex reached from the boundary joins once all but one of its
//! neighbors are boundary vertices, which it detects by counting how often
//! it was hit during the search instead of intersecting neighbor sets. The
//! whole boundary is then merged into one survivor in a single operation.
//!
//! Under [`Strategy::Balanced`] every vertex touched by a merge is stamped
//! with the current round and may not start or join another merge until
//! the round advances, which bounds the number of rounds logarithmically.

use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::graph::BipartiteGraph;
use crate::matching::Matching;
use crate::store::{MergeGraph, Neighbor, OrigEdge, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Multi-vertex merging with round stamps.
    Balanced,
    /// Multi-vertex merging without round stamps.
    Greedy,
    /// Classical one-vertex-at-a-time Rule 2.
    Baseline,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Balanced => "mvm-balanced",
            Strategy::Greedy => "mvm-greedy",
            Strategy::Baseline => "kasi-baseline",
        }
    }
}

/// One vertex consumed by Rule 2: `merged` was matched in the reduced graph
/// through either `edge_a` or `edge_b`, both original edges incident to it.
/// `edge_a` leads to the boundary vertex it was discovered from; `edge_b`
/// leads to the boundary vertex it introduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub merged: u32,
    pub edge_a: OrigEdge,
    pub edge_b: OrigEdge,
    pub op: usize,
}

/// One multi-vertex merge: `absorbed` boundary vertices folded into `survivor`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeOp {
    pub survivor: u32,
    pub absorbed: Vec<u32>,
    pub records: Range<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingTree {
    pub r1_edges: Vec<OrigEdge>,
    pub merge_records: Vec<MergeRecord>,
    pub merge_ops: Vec<MergeOp>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelStats {
    pub merge_ops: u64,
    pub rounds: u64,
    pub edges_touched: u64,
    pub r1_matches: u64,
    pub merged_count: u64,
    pub kernel_n: u64,
    pub kernel_m: u64,
    pub per_round_merge_ops: Vec<u64>,
    /// Same-side merges within one round that shared a boundary vertex.
    pub boundary_overlaps: u64,
}

#[derive(Clone, Debug)]
pub struct KernelResult {
    pub kernel: MergeGraph,
    pub tree: MatchingTree,
    pub partial: Matching,
    pub stats: KernelStats,
    pub strategy: Strategy,
}

impl KernelResult {
    /// Original vertices folded into each live kernel vertex, keyed by store id.
    pub fn orig_of_super(&self) -> Vec<(u32, Vec<u32>)> {
        let n = self.kernel.n_vertices();
        let mut members: Vec<Vec<u32>> = (0..n as u32).map(|v| vec![v]).collect();
        for op in &self.tree.merge_ops {
            for &a in &op.absorbed {
                let mut taken = std::mem::take(&mut members[a as usize]);
                let s = &mut members[op.survivor as usize];
                if taken.len() > s.len() {
                    std::mem::swap(&mut taken, s);
                }
                s.extend(taken);
            }
        }
        self.kernel
            .live_vertices()
            .map(|v| {
                let mut m = std::mem::take(&mut members[v as usize]);
                m.sort_unstable();
                (v, m)
            })
            .collect()
    }
}

const NO_BUCKET: u8 = 0;

/// Worklists of processable vertices. Entries are validated when popped,
/// so a vertex whose degree changed after enqueue is simply skipped.
#[derive(Clone, Debug)]
pub struct Buckets {
    lists: [VecDeque<u32>; 3],
    slot: Vec<u8>,
    pub round: u32,
}

impl Buckets {
    fn new(n: usize) -> Self {
        Buckets { lists: Default::default(), slot: vec![NO_BUCKET; n], round: 1 }
    }

    /// `which` is 1, 2 or 3.
    pub fn push(&mut self, v: u32, which: u8) {
        if self.slot[v as usize] == which {
            return;
        }
        self.slot[v as usize] = which;
        self.lists[which as usize - 1].push_back(v);
    }

    pub fn pop(&mut self, which: u8) -> Option<u32> {
        while let Some(v) = self.lists[which as usize - 1].pop_front() {
            if self.slot[v as usize] == which {
                self.slot[v as usize] = NO_BUCKET;
                return Some(v);
            }
        }
        None
    }

    pub fn contains(&self, v: u32) -> Option<u8> {
        match self.slot[v as usize] {
            NO_BUCKET => None,
            b => Some(b),
        }
    }

    fn clear_slot(&mut self, v: u32) {
        self.slot[v as usize] = NO_BUCKET;
    }

    fn live_len(&self, which: u8) -> usize {
        self.lists[which as usize - 1].iter().filter(|&&v| self.slot[v as usize] == which).count()
    }

    /// Moves the deferred degree-2 vertices into the current worklist.
    fn advance_round(&mut self) {
        let deferred = std::mem::take(&mut self.lists[2]);
        for &v in &deferred {
            if self.slot[v as usize] == 3 {
                self.slot[v as usize] = 2;
            }
        }
        let current = std::mem::replace(&mut self.lists[1], deferred);
        self.lists[2] = current;
        self.lists[2].retain(|&v| self.slot[v as usize] == 3);
        self.round += 1;
    }
}

/// Mergeable and boundary sets of the current search.
#[derive(Clone, Debug, Default)]
pub struct WorkingSets {
    pub mergeable: Vec<u32>,
    pub boundary: Vec<u32>,
    /// Set when the last mergeable vertex added no new boundary vertex.
    pub early_exit: bool,
    records_start: usize,
}

/// Stepwise reduction driver. [`kernelize`] runs it to completion; the
/// individual steps are public so a reduction can be traced.
pub struct Kernelizer {
    g: MergeGraph,
    strategy: Strategy,
    buckets: Buckets,
    sets: WorkingSets,
    tree: MatchingTree,
    stats: KernelStats,
    n_left: usize,
    n_right: usize,
    search_epoch: u32,
    in_hat: Vec<u32>,
    in_tilde: Vec<u32>,
    hit_epoch: Vec<u32>,
    hits: Vec<u32>,
    merge_epoch: u32,
    adj_mark: Vec<u32>,
    ext_mark: Vec<u32>,
    ext_count: Vec<u32>,
    boundary_round: Vec<u32>,
    scratch: Vec<Neighbor>,
    scratch2: Vec<Neighbor>,
}

impl Kernelizer {
    pub fn new(g: &BipartiteGraph, strategy: Strategy, slack: f64) -> Self {
        let mg = MergeGraph::build_from_csr(g, slack);
        let n = mg.n_vertices();
        let mut k = Kernelizer {
            g: mg,
            strategy,
            buckets: Buckets::new(n),
            sets: WorkingSets::default(),
            tree: MatchingTree::default(),
            stats: KernelStats::default(),
            n_left: g.n_left(),
            n_right: g.n_right(),
            search_epoch: 0,
            in_hat: vec![0; n],
            in_tilde: vec![0; n],
            hit_epoch: vec![0; n],
            hits: vec![0; n],
            merge_epoch: 0,
            adj_mark: vec![0; n],
            ext_mark: vec![0; n],
            ext_count: vec![0; n],
            boundary_round: vec![0; n],
            scratch: Vec::new(),
            scratch2: Vec::new(),
        };
        for v in 0..n as u32 {
            k.place(v);
        }
        k
    }

    pub fn graph(&self) -> &MergeGraph {
        &self.g
    }

    pub fn buckets(&self) -> &Buckets {
        &self.buckets
    }

    pub fn working_sets(&self) -> &WorkingSets {
        &self.sets
    }

    pub fn tree(&self) -> &MatchingTree {
        &self.tree
    }

    fn stamps_rounds(&self) -> bool {
        self.strategy == Strategy::Balanced
    }

    /// Puts `v` in the bucket its degree calls for; isolated vertices are dropped.
    fn place(&mut self, v: u32) {
        if !self.g.is_alive(v) {
            self.buckets.clear_slot(v);
            return;
        }
        match self.g.degree(v) {
            0 => {
                self.buckets.clear_slot(v);
                self.g.kill(v);
            }
            1 => self.buckets.push(v, 1),
            2 => {
                if self.stamps_rounds() && self.g.rnd(v) == self.buckets.round {
                    self.buckets.push(v, 3);
                } else {
                    self.buckets.push(v, 2);
                }
            }
            _ => {}
        }
    }

    /// Applies Rule 1 until no degree-1 vertex is left.
    pub fn drain_rule1(&mut self) {
        while let Some(u) = self.buckets.pop(1) {
            if !self.g.is_alive(u) {
                continue;
            }
            if self.g.degree(u) != 1 {
                self.place(u);
                continue;
            }
            self.match_degree_one(u);
        }
    }

    fn match_degree_one(&mut self, u: u32) {
        let nb = self.g.first_live_neighbor(u).expect("degree-1 vertex has a live cell");
        let v = nb.target;
        self.tree.r1_edges.push(nb.orig);
        self.stats.r1_matches += 1;
        self.g.kill(u);
        let mut nbrs = std::mem::take(&mut self.scratch);
        self.g.neighbors_into(v, &mut nbrs);
        self.g.kill(v);
        for y in nbrs.iter().map(|n| n.target) {
            let d = self.g.degree(y);
            self.g.set_degree(y, d - 1);
            self.place(y);
        }
        self.scratch = nbrs;
    }

    /// Pops the next explicit degree-2 start vertex for this round.
    pub fn next_start(&mut self) -> Option<u32> {
        while let Some(u) = self.buckets.pop(2) {
            if !self.g.is_alive(u) {
                continue;
            }
            if self.g.degree(u) != 2 {
                self.place(u);
                continue;
            }
            if self.stamps_rounds() && self.g.rnd(u) == self.buckets.round {
                self.buckets.push(u, 3);
                continue;
            }
            return Some(u);
        }
        None
    }

    /// Grows the mergeable set from the degree-2 vertex `start`, recording
    /// the original edges of every vertex that joins.
    pub fn grow_mergeable_set(&mut self, start: u32) {
        self.search_epoch += 1;
        let ep = self.search_epoch;
        self.sets.mergeable.clear();
        self.sets.boundary.clear();
        self.sets.early_exit = false;
        self.sets.records_start = self.tree.merge_records.len();
        let op = self.tree.merge_ops.len();

        let mut nbrs = std::mem::take(&mut self.scratch);
        let mut inner = std::mem::take(&mut self.scratch2);
        self.g.neighbors_into(start, &mut nbrs);
        debug_assert_eq!(nbrs.len(), 2);
        self.in_hat[start as usize] = ep;
        self.sets.mergeable.push(start);
        for n in &nbrs {
            self.in_tilde[n.target as usize] = ep;
            self.sets.boundary.push(n.target);
        }
        self.tree.merge_records.push(MergeRecord { merged: start, edge_a: nbrs[0].orig, edge_b: nbrs[1].orig, op });

        if self.strategy != Strategy::Baseline {
            let mut next = 0;
            'search: while next < self.sets.boundary.len() {
                let t = self.sets.boundary[next];
                next += 1;
                self.g.neighbors_into(t, &mut nbrs);
                for n in &nbrs {
                    let x = n.target as usize;
                    if self.in_hat[x] == ep {
                        continue;
                    }
                    if self.hit_epoch[x] != ep {
                        self.hit_epoch[x] = ep;
                        self.hits[x] = 0;
                    }
                    self.hits[x] += 1;
                    if self.hits[x] + 1 < self.g.degree(n.target) {
                        continue;
                    }
                    if self.stamps_rounds() && self.g.rnd(n.target) == self.buckets.round {
                        continue;
                    }
                    // All but at most one neighbor of x is already boundary.
                    self.g.neighbors_into(n.target, &mut inner);
                    let mut outside = inner.iter().filter(|o| self.in_tilde[o.target as usize] != ep);
                    let fresh = outside.next().copied();
                    debug_assert!(outside.next().is_none());
                    self.in_hat[x] = ep;
                    self.sets.mergeable.push(n.target);
                    let Some(fresh) = fresh else {
                        self.sets.early_exit = true;
                        break 'search;
                    };
                    self.in_tilde[fresh.target as usize] = ep;
                    self.sets.boundary.push(fresh.target);
                    self.tree.merge_records.push(MergeRecord {
                        merged: n.target,
                        edge_a: n.orig,
                        edge_b: fresh.orig,
                        op,
                    });
                }
            }
        }
        self.scratch = nbrs;
        self.scratch2 = inner;
    }

    /// Merges the current boundary set into its highest-degree vertex and
    /// deletes the mergeable set.
    pub fn merge_set(&mut self) {
        let ep = self.search_epoch;
        let round = self.buckets.round;
        let stamp = self.stamps_rounds();
        if self.sets.early_exit {
            let last = self.sets.mergeable.pop().expect("early exit implies a mergeable vertex");
            self.in_hat[last as usize] = 0;
        }
        debug_assert_eq!(self.sets.boundary.len(), self.sets.mergeable.len() + 1);

        let survivor = *self
            .sets
            .boundary
            .iter()
            .min_by_key(|&&v| (std::cmp::Reverse(self.g.degree(v)), v))
            .expect("boundary is never empty");
        let absorbed: Vec<u32> = self.sets.boundary.iter().copied().filter(|&v| v != survivor).collect();

        for &b in &self.sets.boundary {
            if self.boundary_round[b as usize] == round {
                self.stats.boundary_overlaps += 1;
            }
            self.boundary_round[b as usize] = round;
        }

        self.merge_epoch += 1;
        let mep = self.merge_epoch;
        let mut nbrs = std::mem::take(&mut self.scratch);
        self.g.neighbors_into(survivor, &mut nbrs);
        let mut merged_degree = 0;
        for n in &nbrs {
            let x = n.target as usize;
            if self.in_hat[x] == ep {
                continue;
            }
            merged_degree += 1;
            self.adj_mark[x] = mep;
            if stamp {
                self.g.set_rnd(n.target, round);
            }
        }

        // Externals of the absorbed vertices, with how many absorbed
        // vertices each one loses.
        let mut externals: Vec<(u32, OrigEdge)> = Vec::new();
        for &a in &absorbed {
            self.g.neighbors_into(a, &mut nbrs);
            for n in &nbrs {
                let x = n.target as usize;
                if self.in_hat[x] == ep {
                    continue;
                }
                if self.ext_mark[x] != mep {
                    self.ext_mark[x] = mep;
                    self.ext_count[x] = 1;
                    if self.adj_mark[x] != mep {
                        merged_degree += 1;
                    }
                    externals.push((n.target, n.orig));
                } else {
                    self.ext_count[x] += 1;
                }
            }
        }
        self.scratch = nbrs;

        for &v in &self.sets.mergeable {
            self.g.kill(v);
            self.buckets.clear_slot(v);
        }
        self.g.link_tables(survivor, &absorbed).expect("boundary vertices are live and on one side");
        self.g.set_degree(survivor, merged_degree);
        for &a in &absorbed {
            self.buckets.clear_slot(a);
        }

        for &(x, orig) in &externals {
            let lost = self.ext_count[x as usize];
            let d = self.g.degree(x) - lost;
            self.g.set_degree(x, d);
            if self.adj_mark[x as usize] != mep {
                self.g.insert_external(x, survivor, orig).expect("external and survivor are live on opposite sides");
            }
            if stamp {
                self.g.set_rnd(x, round);
            }
        }
        if stamp {
            self.g.set_rnd(survivor, round);
        }
        for &(x, _) in &externals {
            self.place(x);
        }
        self.place(survivor);

        let records = self.sets.records_start..self.tree.merge_records.len();
        debug_assert_eq!(records.len(), self.sets.mergeable.len());
        self.tree.merge_ops.push(MergeOp { survivor, absorbed, records });
        self.stats.merge_ops += 1;
        self.stats.merged_count += self.sets.mergeable.len() as u64;
        let r = round as usize;
        if self.stats.per_round_merge_ops.len() < r {
            self.stats.per_round_merge_ops.resize(r, 0);
        }
        self.stats.per_round_merge_ops[r - 1] += 1;
    }

    /// Advances the round if deferred work exists. Returns false when done.
    fn advance_round(&mut self) -> bool {
        if self.buckets.live_len(3) == 0 {
            return false;
        }
        self.buckets.advance_round();
        true
    }

    pub fn run(&mut self) {
        loop {
            self.drain_rule1();
            if let Some(u) = self.next_start() {
                self.grow_mergeable_set(u);
                self.merge_set();
                continue;
            }
            if self.buckets.live_len(1) > 0 {
                continue;
            }
            if !self.advance_round() {
                break;
            }
        }
    }

    pub fn finish(self) -> KernelResult {
        let mut stats = self.stats;
        stats.rounds = self.buckets.round as u64;
        stats.edges_touched = self.g.cell_reads();
        stats.kernel_n = (self.g.live_count(Side::Left) + self.g.live_count(Side::Right)) as u64;
        stats.kernel_m = self.g.edge_count() as u64;
        let mut partial = Matching::new(self.n_left, self.n_right);
        for e in &self.tree.r1_edges {
            let added = partial.add(e.left, e.right);
            debug_assert!(added);
        }
        KernelResult { kernel: self.g, tree: self.tree, partial, stats, strategy: self.strategy }
    }
}

/// Reduces `g` until no vertex of degree at most two remains.
pub fn kernelize(g: &BipartiteGraph, strategy: Strategy, slack: f64) -> KernelResult {
    let mut k = Kernelizer::new(g, strategy, slack);
    k.run();
    k.finish()
}

/// Classical Karp-Sipser: Rule 1 first, then single degree-2 merges.
pub fn baseline_kasi(g: &BipartiteGraph, slack: f64) -> KernelResult {
    kernelize(g, Strategy::Baseline, slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(nl: usize, nr: usize, e: &[(u32, u32)]) -> BipartiteGraph {
        BipartiteGraph::from_edges(nl, nr, e).unwrap()
    }

    fn c4() -> BipartiteGraph {
        graph(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)])
    }

    #[test]
    fn p2_is_one_rule1_match() {
        for s in [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline] {
            let r = kernelize(&graph(1, 1, &[(0, 0)]), s, 0.0);
            assert_eq!(r.stats.r1_matches, 1);
            assert_eq!(r.stats.merged_count, 0);
            assert_eq!(r.stats.kernel_n, 0);
            assert_eq!(r.partial.size(), 1);
        }
    }

    #[test]
    fn k33_is_its_own_kernel() {
        let e: Vec<_> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).collect();
        for s in [Strategy::Balanced, Strategy::Greedy, Strategy::Baseline] {
            let r = kernelize(&graph(3, 3, &e), s, 0.0);
            assert_eq!((r.stats.kernel_n, r.stats.kernel_m), (6, 9));
            assert_eq!((r.stats.merged_count, r.stats.r1_matches), (0, 0));
        }
    }

    #[test]
    fn c4_trace() {
        let mut k = Kernelizer::new(&c4(), Strategy::Balanced, 0.0);
        k.drain_rule1();
        let start = k.next_start().unwrap();
        assert_eq!(start, 0);
        k.grow_mergeable_set(start);
        let sets = k.working_sets();
        assert_eq!(sets.mergeable, vec![0, 1]);
        assert_eq!(sets.boundary, vec![2, 3]);
        assert!(sets.early_exit);
        assert_eq!(k.tree().merge_records.len(), 1);

        k.merge_set();
        // Equal degrees: the smaller id survives, u1 is left with one neighbor.
        assert!(k.graph().is_alive(2));
        assert!(!k.graph().is_alive(3));
        assert!(!k.graph().is_alive(0));
        assert_eq!(k.graph().degree(1), 1);
        assert_eq!(k.buckets().contains(1), Some(1));
        k.graph().check_invariants().unwrap();

        k.run();
        let r = k.finish();
        assert_eq!(r.stats.kernel_n, 0);
        assert_eq!((r.stats.merge_ops, r.stats.merged_count, r.stats.r1_matches), (1, 1, 1));
    }

    #[test]
    fn no_implicit_mergeables_behind_high_degree_boundaries() {
        // u0 - (v0, v1); v0 and v1 each lead to 4 private degree-3 leaves' hubs.
        // Left 0 = u0; left 1..=8 externals; right 0 = v0, 1 = v1, 2..=4 fillers.
        let mut e = vec![(0, 0), (0, 1)];
        for x in 1..=4 {
            e.push((x, 0));
        }
        for x in 5..=8 {
            e.push((x, 1));
        }
        for x in 1..=8 {
            for f in 2..=4 {
                e.push((x, f));
            }
        }
        let g = graph(9, 5, &e);
        let mut k = Kernelizer::new(&g, Strategy::Balanced, 0.0);
        k.drain_rule1();
        let s = k.next_start().unwrap();
        k.grow_mergeable_set(s);
        assert_eq!(k.working_sets().mergeable, vec![0]);
        assert!(!k.working_sets().early_exit);
    }

    #[test]
    fn chain_found_in_one_search() {
        // u0-(v0,v1), u1-(v1,v2), u2-(v2,v3); every v also has one external
        // x_i of degree 3 into a dense block so nothing else reduces.
        // left: u0..u2 = 0..3, x0..x3 = 3..7 ; right: v0..v3 = 0..4, f0..f2 = 4..7
        let mut e = vec![(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3)];
        for i in 0..4 {
            e.push((3 + i, i));
            e.push((3 + i, 4));
            e.push((3 + i, 5));
            e.push((3 + i, 6));
        }
        let g = graph(7, 7, &e);
        let mut k = Kernelizer::new(&g, Strategy::Greedy, 0.0);
        k.drain_rule1();
        let s = k.next_start().unwrap();
        assert_eq!(s, 0);
        k.grow_mergeable_set(s);
        let mut hat = k.working_sets().mergeable.clone();
        hat.sort_unstable();
        assert_eq!(hat, vec![0, 1, 2]);
        assert_eq!(k.working_sets().boundary.len(), 4);
    }

    #[test]
    fn shared_externals_collapse_on_survivor() {
        // u0 - (v0, v1); x1..x3 each see v0, v1 and the fillers f1, f2.
        // left: u0 = 0, x1..x3 = 1..4 ; right: v0 = 0, v1 = 1, f1 = 2, f2 = 3
        let mut e = vec![(0, 0), (0, 1)];
        for x in 1..4 {
            e.extend([(x, 0), (x, 1), (x, 2), (x, 3)]);
        }
        let g = graph(4, 4, &e);
        let mut k = Kernelizer::new(&g, Strategy::Balanced, 0.0);
        k.drain_rule1();
        let s = k.next_start().unwrap();
        k.grow_mergeable_set(s);
        assert_eq!(k.working_sets().mergeable, vec![0]);
        k.merge_set();
        let survivor = 4; // v0, tie on degree 4 broken by smaller id
        assert!(k.graph().is_alive(survivor));
        assert!(!k.graph().is_alive(5));
        assert_eq!(k.graph().degree(survivor), 3);
        for x in 1..4 {
            assert_eq!(k.graph().degree(x), 3);
            assert_eq!(k.graph().rnd(x), 1);
        }
        k.graph().check_invariants().unwrap();
    }

    #[test]
    fn buckets_skip_stale_entries() {
        let mut b = Buckets::new(4);
        b.push(0, 2);
        b.push(1, 2);
        b.push(0, 1);
        assert_eq!(b.pop(2), Some(1));
        assert_eq!(b.pop(2), None);
        assert_eq!(b.pop(1), Some(0));
        b.push(2, 3);
        b.advance_round();
        assert_eq!(b.round, 2);
        assert_eq!(b.pop(2), Some(2));
    }
}
