//! Independent oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::VecDeque;

use dsfm_core::potentials::TablePotential;
use dsfm_core::{DecomposableInstance, Potential};
use rand::seq::index::sample;
use rand::Rng;

/// Integer table on `ids`: weighted cut + `c·min(|S|, t)` + modular, redrawn
/// until every value lies in `[-20, 20]`. Submodular by construction.
pub fn random_integer_table(rng: &mut impl Rng, ids: Vec<usize>) -> TablePotential {
    let k = ids.len();
    loop {
        let mut cut = vec![vec![0i64; k]; k];
        for a in 0..k {
            for b in a + 1..k {
                cut[a][b] = rng.gen_range(0..=2);
            }
        }
        let c = rng.gen_range(0..=3i64);
        let t = rng.gen_range(1..=k as i64);
        let modular: Vec<i64> = (0..k).map(|_| rng.gen_range(-6..=6)).collect();
        let values: Vec<i64> = (0..1usize << k)
            .map(|m| {
                let inside = |j: usize| m >> j & 1 == 1;
                let mut v = c * (m.count_ones() as i64).min(t);
                for a in 0..k {
                    if inside(a) {
                        v += modular[a];
                    }
                    for b in a + 1..k {
                        if inside(a) != inside(b) {
                            v += cut[a][b];
                        }
                    }
                }
                v
            })
            .collect();
        if values.iter().all(|v| v.abs() <= 20) {
            let values = values.into_iter().map(|v| v as f64).collect();
            return TablePotential::new(ids, values).expect("valid table");
        }
    }
}

/// `n ≤ max_n`, `r ≤ max_r`, supports of size `≤ max_support`.
pub fn random_table_instance(
    rng: &mut impl Rng,
    max_n: usize,
    max_r: usize,
    max_support: usize,
) -> DecomposableInstance {
    let n = rng.gen_range(2..=max_n);
    let r = rng.gen_range(1..=max_r);
    let pots: Vec<Potential> = (0..r)
        .map(|_| {
            let k = rng.gen_range(1..=max_support.min(n));
            let mut ids = sample(rng, n, k).into_vec();
            ids.sort_unstable();
            random_integer_table(rng, ids).into()
        })
        .collect();
    DecomposableInstance::new(n, pots).expect("valid instance")
}

/// Exhaustive minimum of `f` over all `2^n` sets.
pub fn brute_min(inst: &DecomposableInstance) -> f64 {
    let n = inst.n();
    assert!(n <= 20);
    let mut members = vec![false; n];
    let mut best = f64::INFINITY;
    for mask in 0u64..1 << n {
        for (j, m) in members.iter_mut().enumerate() {
            *m = mask >> j & 1 == 1;
        }
        best = best.min(inst.evaluate_members(&members));
    }
    best
}

/// Edmonds–Karp on an adjacency-list residual graph.
pub struct MaxFlow {
    to: Vec<usize>,
    cap: Vec<f64>,
    adj: Vec<Vec<usize>>,
}

impl MaxFlow {
    pub fn new(nodes: usize) -> Self {
        MaxFlow {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: f64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0.0);
    }

    pub fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        loop {
            let mut prev = vec![usize::MAX; self.adj.len()];
            let mut queue = VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e] > 1e-12 {
                        seen[v] = true;
                        prev[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut push = f64::INFINITY;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.cap[e] -= push;
                self.cap[e ^ 1] += push;
                v = self.to[e ^ 1];
            }
            total += push;
        }
    }
}

/// Minimum of a unary + edge-cut instance through an s-t cut.
pub fn mincut_minimum(inst: &DecomposableInstance) -> f64 {
    let n = inst.n();
    let (s, t) = (n, n + 1);
    let mut g = MaxFlow::new(n + 2);
    let mut offset = 0.0;
    for p in inst.potentials() {
        match p {
            Potential::Unary(u) => {
                let d = u.delta();
                if d > 0.0 {
                    g.add_edge(u.id(), t, d);
                } else if d < 0.0 {
                    g.add_edge(s, u.id(), -d);
                    offset += d;
                }
            }
            Potential::EdgeCut(e) => {
                let (a, b) = e.endpoints();
                g.add_edge(a, b, e.weight());
                g.add_edge(b, a, e.weight());
            }
            other => panic!("not a cut potential: {other:?}"),
        }
    }
    g.run(s, t) + offset
}
