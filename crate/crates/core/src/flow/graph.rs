use std::collections::{HashMap, VecDeque};

use crate::base::{check_base_membership, BlockVector};
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::{Level0Oracle, OracleTable};
use crate::set_function::{SetFunction, MAX_EXHAUSTIVE_CHECK};
use crate::solver::OracleMeter;

/// Deficits and excesses at or below this are treated as zero.
pub const TAU_FLOW: f64 = 1e-9;
/// Exchange capacities at or below this are treated as zero.
pub const TAU_CAP: f64 = 1e-10;

/// `c(u, v) = min { f(S) - x(S) : u ∈ S, v ∉ S }` from a single minimization
/// call with the lemma weights. `u` and `v` are local indices.
pub fn exchange_capacity(
    pot: &dyn SetFunction,
    oracle: &dyn Level0Oracle,
    x: &[f64],
    u: usize,
    v: usize,
) -> Result<f64> {
    let w = capacity_weights(pot, x, u, v)?;
    let sol = oracle.sfm(pot, &w)?;
    capacity_from_set(pot, x, u, v, &sol.members)
}

/// Weights whose minimizers all contain `u` and avoid `v`, and otherwise
/// minimize `f(S) - x(S)`.
pub fn capacity_weights(pot: &dyn SetFunction, x: &[f64], u: usize, v: usize) -> Result<Vec<f64>> {
    let k = pot.support_len();
    if u >= k || v >= k || u == v {
        return Err(DsfmError::Input(format!(
            "arc ({u}, {v}) invalid for a support of size {k}"
        )));
    }
    if x.len() != k {
        return Err(DsfmError::Input("block length differs from support".into()));
    }
    let mut members = vec![false; k];
    members[u] = true;
    let f_u = pot.eval_local(&members);
    members.iter_mut().for_each(|m| *m = true);
    let f_c = pot.eval_local(&members);
    members[v] = false;
    let f_c_minus_v = pot.eval_local(&members);

    let mut w: Vec<f64> = x.iter().map(|a| -a).collect();
    w[u] = -(f_u + 1.0);
    w[v] = -(f_c - f_c_minus_v - 1.0);
    Ok(w)
}

fn capacity_from_set(
    pot: &dyn SetFunction,
    x: &[f64],
    u: usize,
    v: usize,
    members: &[bool],
) -> Result<f64> {
    if !members[u] || members[v] {
        return Err(DsfmError::OracleExactness(format!(
            "capacity query ({u}, {v}): returned set must contain {u} and avoid {v}"
        )));
    }
    let xs: f64 = members
        .iter()
        .zip(x)
        .filter(|(&m, _)| m)
        .map(|(_, a)| a)
        .sum();
    Ok((pot.eval_local(members) - xs).max(0.0))
}

/// Inclusion-minimal set `T ∋ u` with `x(T) = f(T)`, by enumeration.
///
/// Tight sets are closed under intersection, so this is the intersection of
/// all tight sets containing `u`.
pub fn minimal_tight_set(
    pot: &dyn SetFunction,
    x: &[f64],
    u: usize,
    tau: f64,
) -> Result<Vec<usize>> {
    let k = pot.support_len();
    if k > MAX_EXHAUSTIVE_CHECK {
        return Err(DsfmError::Capability(format!(
            "tight-set enumeration needs |C| <= {MAX_EXHAUSTIVE_CHECK}, got {k}"
        )));
    }
    if u >= k || x.len() != k {
        return Err(DsfmError::Input("tight-set query out of range".into()));
    }
    let mut scratch = vec![false; k];
    let mut inter = (1u64 << k) - 1;
    for mask in 0..1u64 << k {
        if mask >> u & 1 == 0 {
            continue;
        }
        let xs: f64 = (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| x[j]).sum();
        if (crate::set_function::eval_mask(pot, mask, &mut scratch) - xs).abs() <= tau {
            inter &= mask;
        }
    }
    Ok((0..k).filter(|&j| inter >> j & 1 == 1).collect())
}

/// Best of the parallel arcs between two elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub block: usize,
    pub from_local: usize,
    pub to_local: usize,
    pub capacity: f64,
}

/// Auxiliary graph over a block vector `x`, with source set
/// `N = {v : (Ax)(v) < target(v)}` and sink set `P = {v : (Ax)(v) > target(v)}`.
///
/// Capacities are computed lazily and cached per block until that block moves.
pub struct AuxiliaryGraph<'a> {
    inst: &'a DecomposableInstance,
    oracles: &'a OracleTable,
    meter: &'a OracleMeter,
    x: BlockVector,
    target: Vec<f64>,
    cache: Vec<HashMap<(u32, u32), f64>>,
    pub debug_checks: bool,
    pub capacity_queries: u64,
}

impl<'a> AuxiliaryGraph<'a> {
    pub fn new(
        inst: &'a DecomposableInstance,
        oracles: &'a OracleTable,
        meter: &'a OracleMeter,
        x: BlockVector,
        target: Vec<f64>,
    ) -> Result<Self> {
        if x.num_blocks() != inst.r() || x.aggregate().len() != inst.n() {
            return Err(DsfmError::Input(
                "block vector does not match instance".into(),
            ));
        }
        if target.len() != inst.n() || target.iter().any(|t| !t.is_finite()) {
            return Err(DsfmError::Input(
                "target must be a finite vector over V".into(),
            ));
        }
        if oracles.len() != inst.r() {
            return Err(DsfmError::Input(
                "oracle table does not match instance".into(),
            ));
        }
        Ok(AuxiliaryGraph {
            inst,
            oracles,
            meter,
            x,
            target,
            cache: vec![HashMap::new(); inst.r()],
            debug_checks: false,
            capacity_queries: 0,
        })
    }

    pub fn instance(&self) -> &'a DecomposableInstance {
        self.inst
    }

    pub fn point(&self) -> &BlockVector {
        &self.x
    }

    pub fn into_point(self) -> BlockVector {
        self.x
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn n(&self) -> usize {
        self.inst.n()
    }

    /// `target(v) - (Ax)(v)`.
    pub fn deficit(&self, v: usize) -> f64 {
        self.target[v] - self.x.aggregate()[v]
    }

    pub fn is_source(&self, v: usize) -> bool {
        self.deficit(v) > TAU_FLOW
    }

    pub fn is_sink(&self, v: usize) -> bool {
        -self.deficit(v) > TAU_FLOW
    }

    pub fn sources(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_source(v)).collect()
    }

    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.is_sink(v)).collect()
    }

    /// `Σ_{v ∈ N} (target(v) - (Ax)(v))`.
    pub fn total_deficit(&self) -> f64 {
        (0..self.n()).map(|v| self.deficit(v).max(0.0)).sum()
    }

    /// Capacity of arc `(lu, lv)` of block `b`; zero below [`TAU_CAP`].
    pub fn capacity(&mut self, b: usize, lu: usize, lv: usize) -> Result<f64> {
        let key = (lu as u32, lv as u32);
        if let Some(&c) = self.cache[b].get(&key) {
            return Ok(c);
        }
        self.capacity_queries += 1;
        let pot = self.inst.potential(b);
        let w = capacity_weights(pot, self.x.block(b), lu, lv)?;
        let sol = self.meter.sfm(self.inst, self.oracles, b, &w)?;
        let c = capacity_from_set(pot, self.x.block(b), lu, lv, &sol.members)?;
        let c = if c <= TAU_CAP { 0.0 } else { c };
        self.cache[b].insert(key, c);
        Ok(c)
    }

    fn local_in(&self, b: usize, v: usize) -> Option<usize> {
        self.inst
            .incidence(v)
            .iter()
            .find(|&&(blk, _)| blk == b)
            .map(|&(_, j)| j)
    }

    /// Parallel arc of maximum capacity from `u` to `v`, if any is positive.
    pub fn best_arc(&mut self, u: usize, v: usize) -> Result<Option<Arc>> {
        let mut best: Option<Arc> = None;
        for &(b, lu) in self.inst.incidence(u) {
            let Some(lv) = self.local_in(b, v) else {
                continue;
            };
            let c = self.capacity(b, lu, lv)?;
            if c > 0.0 && best.is_none_or(|a| c > a.capacity) {
                best = Some(Arc {
                    block: b,
                    from_local: lu,
                    to_local: lv,
                    capacity: c,
                });
            }
        }
        Ok(best)
    }

    /// Positive-capacity arcs `u -> v`, skipping heads for which `skip(v)` holds.
    pub fn out_neighbors(&mut self, u: usize, skip: &dyn Fn(usize) -> bool) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for k in 0..self.inst.incidence(u).len() {
            let (b, lu) = self.inst.incidence(u)[k];
            let ids = self.inst.potential(b).support();
            for (lv, &v) in ids.iter().enumerate() {
                if lv == lu || skip(v) {
                    continue;
                }
                if self.capacity(b, lu, lv)? > 0.0 {
                    out.push(v);
                }
            }
        }
        Ok(out)
    }

    /// Positive-capacity arcs `u -> v` into `v`, skipping tails for which `skip(u)` holds.
    pub fn in_neighbors(&mut self, v: usize, skip: &dyn Fn(usize) -> bool) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for k in 0..self.inst.incidence(v).len() {
            let (b, lv) = self.inst.incidence(v)[k];
            let ids = self.inst.potential(b).support();
            for (lu, &u) in ids.iter().enumerate() {
                if lu == lv || skip(u) {
                    continue;
                }
                if self.capacity(b, lu, lv)? > 0.0 {
                    out.push(u);
                }
            }
        }
        Ok(out)
    }

    /// Shortest positive-capacity path from `N` to `P`, plus the set reached.
    pub fn shortest_path(&mut self) -> Result<(Option<Vec<usize>>, Vec<bool>)> {
        let n = self.n();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for s in self.sources() {
            seen[s] = true;
            queue.push_back(s);
        }
        while let Some(u) = queue.pop_front() {
            let next = {
                let seen_ref = &seen;
                self.out_neighbors(u, &|v| seen_ref[v])?
            };
            for v in next {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                parent[v] = u;
                if self.is_sink(v) {
                    let mut path = vec![v];
                    let mut cur = v;
                    while parent[cur] != usize::MAX {
                        cur = parent[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Ok((Some(path), seen));
                }
                queue.push_back(v);
            }
        }
        Ok((None, seen))
    }

    /// Hop distance from every element to `P` over positive-capacity arcs.
    pub fn distances_to_sinks(&mut self) -> Result<Vec<Option<usize>>> {
        let n = self.n();
        let mut dist = vec![None; n];
        let mut queue = VecDeque::new();
        for t in self.sinks() {
            dist[t] = Some(0);
            queue.push_back(t);
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            let prev = {
                let dist_ref = &dist;
                self.in_neighbors(v, &|u| dist_ref[u].is_some())?
            };
            for u in prev {
                if dist[u].is_none() {
                    dist[u] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        Ok(dist)
    }

    fn invalidate(&mut self, b: usize) {
        self.cache[b].clear();
    }

    /// Pushes `ε` along a path from a source to a sink: on every arc
    /// `(u, v) ∈ E_i`, `x_i(u) += ε` and `x_i(v) -= ε`.
    ///
    /// `ε` is the smallest arc capacity, also bounded by the start's deficit
    /// and the end's excess. Returns the blocks that moved.
    pub fn augment(&mut self, path: &[usize]) -> Result<(f64, Vec<usize>)> {
        if path.len() < 2 {
            return Err(DsfmError::Internal(
                "augmenting path needs at least one arc".into(),
            ));
        }
        let (s, t) = (path[0], path[path.len() - 1]);
        if !self.is_source(s) || !self.is_sink(t) {
            return Err(DsfmError::Internal("path must run from N to P".into()));
        }
        let mut arcs = Vec::with_capacity(path.len() - 1);
        let mut eps = self.deficit(s).min(-self.deficit(t));
        for pair in path.windows(2) {
            let arc = self.best_arc(pair[0], pair[1])?.ok_or_else(|| {
                DsfmError::Internal(format!("arc ({}, {}) has no capacity", pair[0], pair[1]))
            })?;
            eps = eps.min(arc.capacity);
            arcs.push(arc);
        }

        // Arcs sharing a block interact: later ones are re-measured after the
        // earlier moves, and the whole push is retried with a smaller amount
        // if one of them shrank below it.
        'retry: loop {
            if eps <= TAU_CAP {
                return Err(DsfmError::Internal(
                    "augmenting path lost its capacity (stale capacities)".into(),
                ));
            }
            let mut saved: Vec<(usize, Vec<f64>)> = Vec::new();
            for arc in &arcs {
                let b = arc.block;
                if saved.iter().any(|(sb, _)| *sb == b) {
                    self.invalidate(b);
                    let fresh = self.capacity(b, arc.from_local, arc.to_local)?;
                    if fresh < eps - TAU_CAP {
                        for (sb, vals) in saved.into_iter().rev() {
                            let ids = self.inst.potential(sb).support();
                            self.x.set_block(sb, ids, vals);
                            self.invalidate(sb);
                        }
                        eps = fresh;
                        continue 'retry;
                    }
                } else {
                    saved.push((b, self.x.block(b).to_vec()));
                }
                let ids = self.inst.potential(b).support();
                self.x.add(b, ids, arc.from_local, eps);
                self.x.add(b, ids, arc.to_local, -eps);
                self.invalidate(b);
            }
            let changed: Vec<usize> = saved.into_iter().map(|(b, _)| b).collect();
            if self.debug_checks {
                for &b in &changed {
                    let pot = self.inst.potential(b);
                    if pot.support_len() <= 8 && !check_base_membership(pot, self.x.block(b), 1e-7)?
                    {
                        return Err(DsfmError::Internal(format!(
                            "block {b} left its base polytope after augmentation"
                        )));
                    }
                }
            }
            return Ok((eps, changed));
        }
    }
}
