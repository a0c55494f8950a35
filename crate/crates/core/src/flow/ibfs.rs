use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use super::graph::AuxiliaryGraph;
use super::PathFinder;
use crate::error::Result;
use crate::set_function::SetFunction;

const NONE: usize = usize::MAX;

/// One search tree: exact BFS labels, parents and per-level scan queues.
#[derive(Debug, Default)]
struct Tree {
    label: Vec<Option<u32>>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    active: BTreeMap<u32, VecDeque<usize>>,
}

impl Tree {
    fn reset(&mut self, n: usize, roots: &[usize]) {
        self.label = vec![None; n];
        self.parent = vec![NONE; n];
        self.children = vec![Vec::new(); n];
        self.active.clear();
        for &r in roots {
            self.label[r] = Some(0);
            self.activate(r);
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.label[v].is_some()
    }

    fn activate(&mut self, v: usize) {
        if let Some(d) = self.label[v] {
            self.active.entry(d).or_default().push_back(v);
        }
    }

    fn attach(&mut self, v: usize, parent: usize) {
        self.label[v] = Some(self.label[parent].unwrap_or(0) + 1);
        self.parent[v] = parent;
        self.children[parent].push(v);
        self.activate(v);
    }

    /// Lowest active level and its queue length.
    fn frontier(&mut self) -> Option<(u32, usize)> {
        while let Some((&d, q)) = self.active.iter_mut().next() {
            if q.is_empty() {
                self.active.remove(&d);
                continue;
            }
            return Some((d, q.len()));
        }
        None
    }

    /// Pops the next node to scan, skipping entries whose label has changed.
    fn pop(&mut self) -> Option<usize> {
        loop {
            let (&d, q) = self.active.iter_mut().next()?;
            match q.pop_front() {
                Some(v) if self.label[v] == Some(d) => return Some(v),
                Some(_) => {}
                None => {
                    self.active.remove(&d);
                }
            }
        }
    }

    fn push_front(&mut self, v: usize) {
        if let Some(d) = self.label[v] {
            self.active.entry(d).or_default().push_front(v);
        }
    }

    /// Root-first path ending at `v`.
    fn path_to(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while self.parent[cur] != NONE {
            cur = self.parent[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    fn live_children(&self, v: usize) -> Vec<usize> {
        self.children[v]
            .iter()
            .copied()
            .filter(|&c| self.parent[c] == v && self.label[c].is_some())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Source,
    Sink,
}

/// Incremental bidirectional BFS: a forward tree grown from `N` and a backward
/// tree grown from `P`, both kept after each augmentation and repaired by
/// re-adopting orphans (first in, first out within a level).
#[derive(Debug, Default)]
pub struct IbfsFinder {
    s: Tree,
    t: Tree,
    initialized: bool,
    pub rebuilds: usize,
    pub adoptions: usize,
}

impl IbfsFinder {
    pub fn new() -> Self {
        Self::default()
    }

    fn rebuild(&mut self, g: &AuxiliaryGraph) {
        let n = g.n();
        self.s.reset(n, &g.sources());
        self.t.reset(n, &g.sinks());
        self.initialized = true;
        self.rebuilds += 1;
    }

    fn path_valid(g: &mut AuxiliaryGraph, path: &[usize]) -> Result<bool> {
        for pair in path.windows(2) {
            if g.best_arc(pair[0], pair[1])?.is_none() {
                return Ok(false);
            }
        }
        Ok(g.is_source(path[0]) && g.is_sink(path[path.len() - 1]))
    }

    /// Scans one node; returns a path when the trees meet.
    fn scan(&mut self, g: &mut AuxiliaryGraph, side: Side) -> Result<Option<Vec<usize>>> {
        let (tree, other) = match side {
            Side::Source => (&mut self.s, &self.t),
            Side::Sink => (&mut self.t, &self.s),
        };
        let Some(u) = tree.pop() else {
            return Ok(None);
        };
        let next = {
            let tree_ref = &*tree;
            let skip = |v: usize| tree_ref.contains(v);
            match side {
                Side::Source => g.out_neighbors(u, &skip)?,
                Side::Sink => g.in_neighbors(u, &skip)?,
            }
        };
        let mut meet: Option<(u32, usize)> = None;
        for v in next {
            if let Some(d) = other.label[v] {
                if meet.is_none_or(|(best, _)| d < best) {
                    meet = Some((d, v));
                }
            } else if !tree.contains(v) {
                tree.attach(v, u);
            }
        }
        if let Some((_, v)) = meet {
            // `u` still has unexplored arcs after this augmentation.
            tree.push_front(u);
            let (mut head, tail) = match side {
                Side::Source => (self.s.path_to(u), self.t.path_to(v)),
                Side::Sink => (self.s.path_to(v), self.t.path_to(u)),
            };
            head.extend(tail.into_iter().rev());
            return Ok(Some(head));
        }
        Ok(None)
    }

    /// Re-checks parent arcs touched by the moved blocks and repairs orphans.
    fn repair(&mut self, g: &mut AuxiliaryGraph, changed: &[usize], side: Side) -> Result<()> {
        let inst = g.instance();
        let tree = match side {
            Side::Source => &mut self.s,
            Side::Sink => &mut self.t,
        };
        let mut orphans: BinaryHeap<Reverse<(u32, usize)>> = BinaryHeap::new();
        let mut recheck: Vec<usize> = Vec::new();
        for &b in changed {
            for &v in inst.potential(b).support() {
                if tree.contains(v) {
                    recheck.push(v);
                }
            }
        }
        recheck.sort_unstable();
        recheck.dedup();
        for &v in &recheck {
            let d = tree.label[v].unwrap_or(0);
            let p = tree.parent[v];
            let ok = if p == NONE {
                match side {
                    Side::Source => g.is_source(v),
                    Side::Sink => g.is_sink(v),
                }
            } else {
                let arc = match side {
                    Side::Source => g.best_arc(p, v)?,
                    Side::Sink => g.best_arc(v, p)?,
                };
                arc.is_some()
            };
            if ok {
                // Capacities may have grown inside the moved blocks.
                tree.activate(v);
            } else {
                orphans.push(Reverse((d, v)));
            }
        }

        let mut lowest_freed: Option<u32> = None;
        while let Some(Reverse((d, v))) = orphans.pop() {
            if tree.label[v] != Some(d) {
                continue;
            }
            let kids = tree.live_children(v);
            tree.parent[v] = NONE;
            let mut adopted = None;
            if d > 0 {
                let candidates = {
                    let tree_ref = &*tree;
                    let skip = |p: usize| tree_ref.label[p] != Some(d - 1);
                    match side {
                        Side::Source => g.in_neighbors(v, &skip)?,
                        Side::Sink => g.out_neighbors(v, &skip)?,
                    }
                };
                adopted = candidates.into_iter().next();
            }
            if let Some(p) = adopted {
                tree.parent[v] = p;
                tree.children[p].push(v);
                self.adoptions += 1;
                continue;
            }
            tree.label[v] = None;
            tree.children[v].clear();
            for c in kids {
                orphans.push(Reverse((d + 1, c)));
            }
            lowest_freed = Some(lowest_freed.map_or(d, |l: u32| l.min(d)));
        }

        // Freed nodes may be reachable again from the level just below them.
        if let Some(lf) = lowest_freed {
            let from = lf.saturating_sub(1);
            for v in 0..tree.label.len() {
                if tree.label[v].is_some_and(|d| d >= from) {
                    tree.activate(v);
                }
            }
        }
        Ok(())
    }
}

impl PathFinder for IbfsFinder {
    fn next_path(&mut self, g: &mut AuxiliaryGraph) -> Result<Option<Vec<usize>>> {
        if !self.initialized {
            self.rebuild(g);
        }
        loop {
            let side = match (self.s.frontier(), self.t.frontier()) {
                (None, None) => {
                    // Trees exhausted: confirm with a fresh search.
                    let (path, _) = g.shortest_path()?;
                    if path.is_some() {
                        self.initialized = false;
                    }
                    return Ok(path);
                }
                (Some(_), None) => Side::Source,
                (None, Some(_)) => Side::Sink,
                (Some((_, ns)), Some((_, nt))) => {
                    if ns <= nt {
                        Side::Source
                    } else {
                        Side::Sink
                    }
                }
            };
            if let Some(path) = self.scan(g, side)? {
                if Self::path_valid(g, &path)? {
                    return Ok(Some(path));
                }
                self.rebuild(g);
            }
        }
    }

    fn after_augment(
        &mut self,
        g: &mut AuxiliaryGraph,
        _path: &[usize],
        changed: &[usize],
    ) -> Result<()> {
        if !self.initialized {
            return Ok(());
        }
        self.repair(g, changed, Side::Source)?;
        self.repair(g, changed, Side::Sink)?;
        Ok(())
    }
}
