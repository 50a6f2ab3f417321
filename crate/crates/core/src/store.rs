//! Mergeable edge-table storage.
//!
//! Every vertex owns a contiguous table `[ptr_start, cap_end)` inside one
//! shared cell array; `[ptr_start, ptr_end)` holds cells and
//! `[ptr_end, cap_end)` is free gap. Merging vertices does not move cells:
//! the absorbed vertex's table is linked onto the survivor's chain through
//! `link_next`, with `link_last` naming the chain tail so appends are O(1).
//! `link_cur` remembers the first table of the chain that may still hold a
//! gap, which keeps external inserts amortized O(1) when gaps are on the
//! order of the degree.
//!
//! A cell is dead when it carries [`TOMBSTONE`] or when its target vertex is
//! no longer alive. Vertex ids are never reused, so a stale cell stays dead
//! until compaction reclaims it.
//!
//! Vertex ids: left vertices are `0..n_left`, right vertices follow at
//! `n_left..n_left + n_right`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

pub const TOMBSTONE: u32 = u32::MAX;
pub const NONE: u32 = u32::MAX;
const DEAD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// An edge of the input graph, as `(left id, right id)` in input numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrigEdge {
    pub left: u32,
    pub right: u32,
}

impl OrigEdge {
    pub const NONE: OrigEdge = OrigEdge { left: NONE, right: NONE };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeCell {
    pub target: u32,
    pub orig: OrigEdge,
}

impl EdgeCell {
    const GAP: EdgeCell = EdgeCell { target: TOMBSTONE, orig: OrigEdge::NONE };
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRecord {
    pub ptr_start: usize,
    pub ptr_end: usize,
    pub cap_end: usize,
    pub link_next: u32,
    pub link_cur: u32,
    pub link_last: u32,
    pub degree: u32,
    pub alive: bool,
    pub rnd: u32,
}

/// One live neighbor as yielded by traversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub target: u32,
    pub orig: OrigEdge,
}

#[derive(Clone, Debug)]
pub struct MergeGraph {
    n_left: usize,
    n_right: usize,
    vertices: Vec<VertexRecord>,
    cells: Vec<EdgeCell>,
    live: [usize; 2],
    cell_reads: u64,
    /// Per vertex: `DEAD`, or the last traversal epoch that reached it.
    mark: Vec<u32>,
    epoch: u32,
}

impl MergeGraph {
    /// Lays out one table per vertex with `ceil(deg * (1 + slack))` slots.
    pub fn build_from_csr(g: &BipartiteGraph, slack: f64) -> MergeGraph {
        let slack = if slack.is_finite() && slack > 0.0 { slack } else { 0.0 };
        let n_left = g.n_left();
        let n = g.n();
        let cap_of = |deg: usize| ((deg as f64) * (1.0 + slack)).ceil() as usize;
        let total: usize = (0..g.n_left())
            .map(|u| cap_of(g.left_degree(u)))
            .chain((0..g.n_right()).map(|v| cap_of(g.right_degree(v))))
            .sum();
        let mut cells = Vec::with_capacity(total);
        let mut vertices = Vec::with_capacity(n);
        let mut live = [0usize; 2];
        for id in 0..n {
            let (adj, deg) = if id < n_left {
                (g.left_neighbors(id), g.left_degree(id))
            } else {
                (g.right_neighbors(id - n_left), g.right_degree(id - n_left))
            };
            let start = cells.len();
            for &t in adj {
                let (target, orig) = if id < n_left {
                    (n_left as u32 + t, OrigEdge { left: id as u32, right: t })
                } else {
                    (t, OrigEdge { left: t, right: (id - n_left) as u32 })
                };
                cells.push(EdgeCell { target, orig });
            }
            let cap = start + cap_of(deg).max(deg);
            cells.resize(cap, EdgeCell::GAP);
            vertices.push(VertexRecord {
                ptr_start: start,
                ptr_end: start + deg,
                cap_end: cap,
                link_next: NONE,
                link_cur: id as u32,
                link_last: id as u32,
                degree: deg as u32,
                alive: true,
                rnd: 0,
            });
            live[(id >= n_left) as usize] += 1;
        }
        MergeGraph { n_left, n_right: g.n_right(), vertices, cells, live, cell_reads: 0, mark: vec![0; n], epoch: 0 }
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn side(&self, v: u32) -> Side {
        if (v as usize) < self.n_left {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Maps a store id back to the input numbering of its side.
    pub fn local_id(&self, v: u32) -> u32 {
        match self.side(v) {
            Side::Left => v,
            Side::Right => v - self.n_left as u32,
        }
    }

    pub fn left_id(&self, u: u32) -> u32 {
        u
    }

    pub fn right_id(&self, v: u32) -> u32 {
        self.n_left as u32 + v
    }

    pub fn record(&self, v: u32) -> &VertexRecord {
        &self.vertices[v as usize]
    }

    pub fn cells(&self) -> &[EdgeCell] {
        &self.cells
    }

    pub fn is_alive(&self, v: u32) -> bool {
        self.vertices[v as usize].alive
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.vertices[v as usize].degree
    }

    pub fn rnd(&self, v: u32) -> u32 {
        self.vertices[v as usize].rnd
    }

    pub fn set_rnd(&mut self, v: u32, round: u32) {
        self.vertices[v as usize].rnd = round;
    }

    /// Overrides the cached degree. Callers that retire neighbors through
    /// [`Self::connect_tables`] use it to keep external degrees exact.
    pub fn set_degree(&mut self, v: u32, degree: u32) {
        self.vertices[v as usize].degree = degree;
    }

    /// Instrumented count of edge cells (and chain hops) read so far.
    pub fn cell_reads(&self) -> u64 {
        self.cell_reads
    }

    pub fn live_count(&self, side: Side) -> usize {
        self.live[side as usize]
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.vertices.len() as u32).filter(move |&v| self.vertices[v as usize].alive)
    }

    /// Current edge count: sum of live left degrees.
    pub fn edge_count(&self) -> usize {
        (0..self.n_left as u32).filter(|&u| self.is_alive(u)).map(|u| self.degree(u) as usize).sum()
    }

    fn cell_is_dead(&self, c: &EdgeCell) -> bool {
        c.target == TOMBSTONE || self.mark[c.target as usize] == DEAD
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch += 1;
        if self.epoch == DEAD {
            self.mark.iter_mut().filter(|m| **m != DEAD).for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Chain members of `v` in link order, `v` first.
    pub fn chain(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut cur = self.vertices[v as usize].link_next;
        while cur != NONE {
            out.push(cur);
            cur = self.vertices[cur as usize].link_next;
        }
        out
    }

    /// Marks `v` dead without touching any neighbor.
    pub(crate) fn kill(&mut self, v: u32) {
        let rec = &mut self.vertices[v as usize];
        if rec.alive {
            rec.alive = false;
            self.mark[v as usize] = DEAD;
            let side = self.side(v) as usize;
            self.live[side] -= 1;
        }
    }

    /// Distinct live neighbors of `v` in chain order, then slot order.
    /// Works on dead vertices too; the kernelizer walks absorbed chains.
    pub(crate) fn neighbors_into(&mut self, v: u32, out: &mut Vec<Neighbor>) {
        out.clear();
        let epoch = self.next_epoch();
        let mut t = v;
        while t != NONE {
            let rec = &self.vertices[t as usize];
            let (s, e, next) = (rec.ptr_start, rec.ptr_end, rec.link_next);
            self.cell_reads += (e - s) as u64;
            for i in s..e {
                let c = self.cells[i];
                if c.target == TOMBSTONE {
                    continue;
                }
                let m = &mut self.mark[c.target as usize];
                if *m == DEAD || *m == epoch {
                    continue;
                }
                *m = epoch;
                out.push(Neighbor { target: c.target, orig: c.orig });
            }
            t = next;
        }
    }

    /// Sorted distinct live neighbors, computed without touching the
    /// instrumentation counter. Meant for checks, not for the kernelizer.
    pub fn neighbor_set(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut t = v;
        while t != NONE {
            let rec = &self.vertices[t as usize];
            out.extend(
                self.cells[rec.ptr_start..rec.ptr_end].iter().filter(|c| !self.cell_is_dead(c)).map(|c| c.target),
            );
            t = rec.link_next;
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Yields each distinct live neighbor of `v` once.
    pub fn iterate_neighbors(&mut self, v: u32) -> Result<Vec<Neighbor>> {
        self.require_alive(v)?;
        let mut out = Vec::with_capacity(self.degree(v) as usize);
        self.neighbors_into(v, &mut out);
        Ok(out)
    }

    /// First live cell in chain order; the sole neighbor of a degree-1 vertex.
    pub(crate) fn first_live_neighbor(&mut self, v: u32) -> Option<Neighbor> {
        let mut t = v;
        while t != NONE {
            let rec = &self.vertices[t as usize];
            let (s, e, next) = (rec.ptr_start, rec.ptr_end, rec.link_next);
            for i in s..e {
                self.cell_reads += 1;
                let c = self.cells[i];
                if !self.cell_is_dead(&c) {
                    return Some(Neighbor { target: c.target, orig: c.orig });
                }
            }
            t = next;
        }
        None
    }

    fn require_alive(&self, v: u32) -> Result<()> {
        if (v as usize) < self.vertices.len() && self.vertices[v as usize].alive {
            Ok(())
        } else {
            Err(Error::DeadVertex(v))
        }
    }

    /// Lowers `ptr_end` of table `t` past any trailing dead cells.
    fn trim_tail(&mut self, t: u32) {
        loop {
            let rec = &self.vertices[t as usize];
            if rec.ptr_end == rec.ptr_start {
                return;
            }
            self.cell_reads += 1;
            let last = self.cells[rec.ptr_end - 1];
            if !self.cell_is_dead(&last) {
                return;
            }
            let rec = &mut self.vertices[t as usize];
            rec.ptr_end -= 1;
            self.cells[rec.ptr_end] = EdgeCell::GAP;
        }
    }

    /// Appends the chains of `absorbed` to `kept`'s chain. The absorbed
    /// vertices stop being standalone vertices; their cells stay reachable
    /// through `kept`, whose degree is recomputed with duplicates suppressed.
    pub fn connect_tables(&mut self, kept: u32, absorbed: &[u32]) -> Result<()> {
        self.link_tables(kept, absorbed)?;
        if absorbed.is_empty() {
            return Ok(());
        }
        let mut scratch = Vec::new();
        self.neighbors_into(kept, &mut scratch);
        self.vertices[kept as usize].degree = scratch.len() as u32;
        Ok(())
    }

    /// [`Self::connect_tables`] without the degree update, for callers that
    /// already know the merged degree.
    pub(crate) fn link_tables(&mut self, kept: u32, absorbed: &[u32]) -> Result<()> {
        self.require_alive(kept)?;
        for &a in absorbed {
            if a == kept {
                return Err(Error::SelfAbsorb(kept));
            }
            self.require_alive(a)?;
            if self.side(a) != self.side(kept) {
                return Err(Error::SideMismatch(kept, a));
            }
        }
        if absorbed.is_empty() {
            return Ok(());
        }
        for &a in absorbed {
            self.kill(a);
        }
        let old_tail = self.vertices[kept as usize].link_last;
        self.trim_tail(old_tail);
        for &a in absorbed {
            let tail = self.vertices[kept as usize].link_last;
            let a_last = self.vertices[a as usize].link_last;
            self.vertices[tail as usize].link_next = a;
            self.vertices[kept as usize].link_last = a_last;
            self.trim_tail(a);
            if a_last != a {
                self.trim_tail(a_last);
            }
        }
        Ok(())
    }

    /// Writes a new cell `target` into `v`'s chain, reusing the first gap
    /// reachable from `link_cur`. The caller guarantees `target` is not
    /// already a live neighbor of `v`; the degree grows by one.
    pub fn insert_external(&mut self, v: u32, target: u32, orig: OrigEdge) -> Result<()> {
        self.require_alive(v)?;
        self.require_alive(target)?;
        if self.side(v) == self.side(target) {
            return Err(Error::SideMismatch(v, target));
        }
        let cell = EdgeCell { target, orig };
        if !self.try_insert(v, cell) {
            self.compact(v)?;
            if !self.try_insert(v, cell) {
                self.grow_tail(v);
                let placed = self.try_insert(v, cell);
                debug_assert!(placed);
            }
        }
        self.vertices[v as usize].degree += 1;
        Ok(())
    }

    fn try_insert(&mut self, v: u32, cell: EdgeCell) -> bool {
        let mut cur = self.vertices[v as usize].link_cur;
        loop {
            self.cell_reads += 1;
            let rec = &mut self.vertices[cur as usize];
            if rec.ptr_end < rec.cap_end {
                self.cells[rec.ptr_end] = cell;
                rec.ptr_end += 1;
                return true;
            }
            let next = rec.link_next;
            if next == NONE {
                return false;
            }
            cur = next;
            self.vertices[v as usize].link_cur = cur;
        }
    }

    /// Relocates the tail table of `v`'s chain to the end of the cell array
    /// with doubled capacity.
    fn grow_tail(&mut self, v: u32) {
        let t = self.vertices[v as usize].link_last;
        let rec = &self.vertices[t as usize];
        let (s, e, cap) = (rec.ptr_start, rec.ptr_end, rec.cap_end);
        let new_cap = (2 * (cap - s)).max(1);
        let base = self.cells.len();
        self.cell_reads += (e - s) as u64;
        self.cells.extend_from_within(s..e);
        self.cells.resize(base + new_cap, EdgeCell::GAP);
        for c in &mut self.cells[s..cap] {
            *c = EdgeCell::GAP;
        }
        let rec = &mut self.vertices[t as usize];
        rec.ptr_start = base;
        rec.ptr_end = base + (e - s);
        rec.cap_end = base + new_cap;
        self.vertices[v as usize].link_cur = t;
    }

    /// Packs every table of `v`'s chain: dead and duplicate-target cells
    /// become tail gaps. The first cell per target in chain order survives.
    pub fn compact(&mut self, v: u32) -> Result<()> {
        self.require_alive(v)?;
        let epoch = self.next_epoch();
        let mut degree = 0u32;
        let mut t = v;
        while t != NONE {
            let rec = &self.vertices[t as usize];
            let (s, e, next) = (rec.ptr_start, rec.ptr_end, rec.link_next);
            self.cell_reads += (e - s) as u64;
            let mut w = s;
            for i in s..e {
                let c = self.cells[i];
                if c.target == TOMBSTONE {
                    continue;
                }
                let m = &mut self.mark[c.target as usize];
                if *m == DEAD || *m == epoch {
                    continue;
                }
                *m = epoch;
                self.cells[w] = c;
                w += 1;
            }
            for c in &mut self.cells[w..e] {
                *c = EdgeCell::GAP;
            }
            self.vertices[t as usize].ptr_end = w;
            degree += (w - s) as u32;
            t = next;
        }
        let rec = &mut self.vertices[v as usize];
        rec.degree = degree;
        rec.link_cur = v;
        Ok(())
    }

    /// Deletes `v`; every live neighbor loses one degree. Cells elsewhere
    /// that target `v` become stale and are skipped until compaction.
    pub fn remove_vertex(&mut self, v: u32) -> Result<()> {
        self.require_alive(v)?;
        let mut nbrs = Vec::new();
        self.neighbors_into(v, &mut nbrs);
        self.kill(v);
        for nb in nbrs {
            let rec = &mut self.vertices[nb.target as usize];
            rec.degree = rec.degree.saturating_sub(1);
        }
        Ok(())
    }

    /// Text dump: one line per live vertex with its chain and slot indices.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in self.live_vertices() {
            let rec = &self.vertices[v as usize];
            let side = if self.side(v) == Side::Left { 'L' } else { 'R' };
            let _ = write!(out, "{side}{} deg={} rnd={} |", self.local_id(v), rec.degree, rec.rnd);
            for t in self.chain(v) {
                let r = &self.vertices[t as usize];
                let _ = write!(out, " [{}:{}..{}/{}", t, r.ptr_start, r.ptr_end, r.cap_end);
                for i in r.ptr_start..r.ptr_end {
                    let c = &self.cells[i];
                    if c.target == TOMBSTONE {
                        let _ = write!(out, " x@{i}");
                    } else if self.cell_is_dead(c) {
                        let _ = write!(out, " ~{}@{i}", c.target);
                    } else {
                        let _ = write!(out, " {}@{i}", c.target);
                    }
                }
                out.push(']');
            }
            out.push('\n');
        }
        out
    }

    /// Full structural check: chain shape, degree counters, symmetric
    /// liveness, and left/right degree sums.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.vertices.len();
        let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
        for v in self.live_vertices() {
            let rec = &self.vertices[v as usize];
            let mut seen = std::collections::HashSet::new();
            let mut t = v;
            let mut last = v;
            while t != NONE {
                if !seen.insert(t) {
                    return Err(format!("chain of {v} revisits {t}"));
                }
                let r = &self.vertices[t as usize];
                if r.ptr_start > r.ptr_end || r.ptr_end > r.cap_end {
                    return Err(format!("table {t} has bad pointers"));
                }
                last = t;
                t = r.link_next;
            }
            if rec.link_last != last {
                return Err(format!("link_last of {v} is {} but chain ends at {last}", rec.link_last));
            }
            let mut distinct: Vec<u32> = seen
                .iter()
                .flat_map(|&t| {
                    let r = &self.vertices[t as usize];
                    self.cells[r.ptr_start..r.ptr_end].iter()
                })
                .filter(|c| !self.cell_is_dead(c))
                .map(|c| c.target)
                .collect();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() != rec.degree as usize {
                return Err(format!("degree of {v} is {} but has {} live neighbors", rec.degree, distinct.len()));
            }
            if distinct.iter().any(|&t| self.side(t) == self.side(v)) {
                return Err(format!("{v} has a same-side neighbor"));
            }
            nbrs[v as usize] = distinct;
        }
        for v in self.live_vertices() {
            for &t in &nbrs[v as usize] {
                if nbrs[t as usize].binary_search(&v).is_err() {
                    return Err(format!("{v} sees {t} but not vice versa"));
                }
            }
        }
        let sum = |range: std::ops::Range<usize>| -> usize {
            range.filter(|&v| self.vertices[v].alive).map(|v| self.vertices[v].degree as usize).sum()
        };
        let (l, r) = (sum(0..self.n_left), sum(self.n_left..n));
        if l != r {
            return Err(format!("left degree sum {l} != right degree sum {r}"));
        }
        Ok(())
    }
}
