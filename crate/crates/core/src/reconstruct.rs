//! Lifting a kernel matching back to a matching of the input graph.
//!
//! Every merge operation folded a set of boundary vertices into one
//! survivor and deleted the mergeable vertices between them. Undoing the
//! operations newest first, the matched boundary (if any) is the one whose
//! group holds the matched endpoint of the survivor; the mergeable vertices
//! are then matched along the tree they formed, each taking the boundary
//! on the side away from the matched one.
//!
//! Groups are tracked with a union-find that keeps every union in a log so
//! it can be split again in reverse order.

use crate::error::{Error, Result};
use crate::graph::BipartiteView;
use crate::kernel::KernelResult;
use crate::matching::Matching;
use crate::store::{MergeGraph, Neighbor, OrigEdge, Side, NONE};

/// The live part of a reduced store as a compact bipartite graph.
#[derive(Clone, Debug)]
pub struct KernelGraph {
    left_ids: Vec<u32>,
    right_ids: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    origs: Vec<OrigEdge>,
}

impl KernelGraph {
    pub fn from_store(g: &mut MergeGraph) -> Self {
        let mut local = vec![NONE; g.n_vertices()];
        let mut left_ids = Vec::new();
        let mut right_ids = Vec::new();
        for v in g.live_vertices().collect::<Vec<_>>() {
            let ids = match g.side(v) {
                Side::Left => &mut left_ids,
                Side::Right => &mut right_ids,
            };
            local[v as usize] = ids.len() as u32;
            ids.push(v);
        }
        let mut offsets = vec![0];
        let mut targets = Vec::new();
        let mut origs = Vec::new();
        let mut nbrs: Vec<Neighbor> = Vec::new();
        for &u in &left_ids {
            g.neighbors_into(u, &mut nbrs);
            for n in &nbrs {
                targets.push(local[n.target as usize]);
                origs.push(n.orig);
            }
            offsets.push(targets.len());
        }
        KernelGraph { left_ids, right_ids, offsets, targets, origs }
    }

    pub fn m(&self) -> usize {
        self.targets.len()
    }

    /// Store id of kernel left vertex `u`.
    pub fn left_store_id(&self, u: usize) -> u32 {
        self.left_ids[u]
    }

    pub fn right_store_id(&self, v: usize) -> u32 {
        self.right_ids[v]
    }

    /// Input edge carried by kernel edge `(u, v)`.
    pub fn orig_edge(&self, u: usize, v: u32) -> Option<OrigEdge> {
        let range = self.offsets[u]..self.offsets[u + 1];
        range.clone().zip(&self.targets[range]).find(|&(_, &t)| t == v).map(|(i, _)| self.origs[i])
    }
}

impl BipartiteView for KernelGraph {
    fn n_left(&self) -> usize {
        self.left_ids.len()
    }

    fn n_right(&self) -> usize {
        self.right_ids.len()
    }

    fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }
}

/// Union by size, no path compression, so unions undo in O(1).
struct RollbackUnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    /// `(child root, parent root)` per union.
    log: Vec<(u32, u32)>,
}

impl RollbackUnionFind {
    fn new(n: usize) -> Self {
        RollbackUnionFind { parent: (0..n as u32).collect(), size: vec![1; n], log: Vec::new() }
    }

    fn find(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        debug_assert_ne!(ra, rb);
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.log.push((rb, ra));
    }

    fn undo(&mut self) -> (u32, u32) {
        let (child, parent) = self.log.pop().expect("undo without union");
        self.parent[child as usize] = child;
        self.size[parent as usize] -= self.size[child as usize];
        (child, parent)
    }
}

struct Lifter<'a> {
    uf: RollbackUnionFind,
    /// Per group root, the store id of its matched member or `NONE`.
    group_mate: Vec<u32>,
    matching: Matching,
    mg: &'a MergeGraph,
}

impl Lifter<'_> {
    fn endpoints(&self, e: OrigEdge) -> (u32, u32) {
        (self.mg.left_id(e.left), self.mg.right_id(e.right))
    }

    fn take(&mut self, e: OrigEdge) -> Result<()> {
        let (l, r) = self.endpoints(e);
        for x in [l, r] {
            let root = self.uf.find(x) as usize;
            if self.group_mate[root] != NONE {
                return Err(Error::Inconsistent(format!(
                    "group of {x} already matched through {}",
                    self.group_mate[root]
                )));
            }
            self.group_mate[root] = x;
        }
        if !self.matching.add(e.left, e.right) {
            return Err(Error::Inconsistent(format!("input vertex of ({}, {}) matched twice", e.left, e.right)));
        }
        Ok(())
    }

    fn is_free(&self, x: u32) -> bool {
        self.group_mate[self.uf.find(x) as usize] == NONE
    }
}

/// Combines the kernel matching, the Rule 1 matches and the merge history
/// into a matching of the input graph.
pub fn reconstruct(kernel: &KernelGraph, kernel_matching: &Matching, result: &KernelResult) -> Result<Matching> {
    let mg = &result.kernel;
    let tree = &result.tree;
    let mut lf = Lifter {
        uf: RollbackUnionFind::new(mg.n_vertices()),
        group_mate: vec![NONE; mg.n_vertices()],
        matching: Matching::new(mg.n_left(), mg.n_right()),
        mg,
    };

    let mut log_marks = Vec::with_capacity(tree.merge_ops.len());
    for op in &tree.merge_ops {
        log_marks.push(lf.uf.log.len());
        for &a in &op.absorbed {
            lf.uf.union(op.survivor, a);
        }
    }

    for (u, v) in kernel_matching.pairs() {
        let e = kernel
            .orig_edge(u as usize, v)
            .ok_or_else(|| Error::Inconsistent(format!("kernel pair ({u}, {v}) is not a kernel edge")))?;
        lf.take(e)?;
    }
    for &e in &tree.r1_edges {
        lf.take(e)?;
    }

    for (op, &mark) in tree.merge_ops.iter().zip(&log_marks).rev() {
        while lf.uf.log.len() > mark {
            let (child, parent) = lf.uf.undo();
            let o = lf.group_mate[parent as usize];
            if o != NONE && lf.uf.find(o) == child {
                lf.group_mate[child as usize] = o;
                lf.group_mate[parent as usize] = NONE;
            }
        }
        let boundary_side = mg.side(op.survivor);
        let boundary_end = |e: OrigEdge| match boundary_side {
            Side::Left => mg.left_id(e.left),
            Side::Right => mg.right_id(e.right),
        };
        for rec in tree.merge_records[op.records.clone()].iter().rev() {
            if lf.is_free(boundary_end(rec.edge_b)) {
                lf.take(rec.edge_b)?;
            } else if lf.is_free(boundary_end(rec.edge_a)) {
                lf.take(rec.edge_a)?;
            } else {
                return Err(Error::Inconsistent(format!(
                    "both boundaries of merged vertex {} are matched",
                    rec.merged
                )));
            }
        }
    }
    Ok(lf.matching)
}
