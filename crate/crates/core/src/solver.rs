//! Level-1 solver interface, reports and the name-based registry.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::{OracleTable, QuadSolution, SfmSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverFamily {
    Flow,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcdmParams {
    /// Steps per epoch; `None` uses `⌈r·n/2⌉`.
    pub epoch_len: Option<usize>,
    /// `false` freezes the schedule, which reduces every step to plain RCDM.
    pub momentum: bool,
}

impl Default for AcdmParams {
    fn default() -> Self {
        AcdmParams {
            epoch_len: None,
            momentum: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Gradient solvers: number of steps (default `1000·r`). Flow solvers:
    /// augmentation cap (default unbounded up to a safety limit).
    pub iterations: Option<usize>,
    pub seed: u64,
    /// Starting point; defaults to the greedy vertex per block.
    pub initial: Option<BlockVector>,
    /// Reject inexact oracles for flow solvers instead of flagging the report.
    pub strict: bool,
    /// Gradient solvers stop early once the rounded certificate gap is this small.
    pub target_gap: Option<f64>,
    /// Iteration counts at which gradient solvers record a rounded snapshot.
    pub checkpoints: Vec<usize>,
    /// Extra invariant checks (distance-label monotonicity, block membership).
    pub debug_checks: bool,
    pub acdm: AcdmParams,
    /// AP issues its block projections in parallel when `r` reaches this.
    pub parallel_threshold: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            iterations: None,
            seed: 0,
            initial: None,
            strict: false,
            target_gap: None,
            checkpoints: Vec::new(),
            debug_checks: false,
            acdm: AcdmParams::default(),
            parallel_threshold: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iterations: usize,
    pub value: f64,
    pub gap: f64,
    pub objective: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solver: String,
    /// Sorted element ids of the returned set.
    pub minimizer: Vec<usize>,
    /// `f(minimizer)`.
    pub value: f64,
    /// `½||Ay||²` at the final point.
    pub objective: f64,
    /// `f(S) - (Ay)⁻(V)`; zero certifies optimality.
    pub gap: f64,
    pub iterations: usize,
    pub oracle_calls: Vec<u64>,
    pub oracle_calls_total: u64,
    pub oracle_seconds: f64,
    /// Mean seconds per oracle call, averaged over blocks that were called.
    pub oracle_time_avg: f64,
    /// Largest per-block mean seconds per oracle call.
    pub oracle_time_max: f64,
    pub inexact_oracle_answers: u64,
    pub wall_seconds: f64,
    /// `false` when an inexact level-0 oracle could have invalidated the result.
    pub certified: bool,
    pub warnings: Vec<String>,
    pub checkpoints: Vec<Checkpoint>,
    #[serde(skip)]
    pub point: Option<BlockVector>,
}

/// Counts and times level-0 calls per block; shareable across threads.
#[derive(Debug)]
pub struct OracleMeter {
    calls: Vec<AtomicU64>,
    nanos: Vec<AtomicU64>,
    inexact: AtomicU64,
}

impl OracleMeter {
    pub fn new(r: usize) -> Self {
        OracleMeter {
            calls: (0..r).map(|_| AtomicU64::new(0)).collect(),
            nanos: (0..r).map(|_| AtomicU64::new(0)).collect(),
            inexact: AtomicU64::new(0),
        }
    }

    fn record(&self, i: usize, start: Instant) {
        self.calls[i].fetch_add(1, Ordering::Relaxed);
        self.nanos[i].fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
    }

    pub fn quadratic(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        i: usize,
        w: &[f64],
        warm: Option<&[f64]>,
    ) -> Result<QuadSolution> {
        let start = Instant::now();
        let out = oracles.get(i).quadratic(inst.potential(i), w, warm);
        self.record(i, start);
        if matches!(&out, Ok(q) if !q.exact) {
            self.inexact.fetch_add(1, Ordering::Relaxed);
        }
        out
    }

    pub fn sfm(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        i: usize,
        w: &[f64],
    ) -> Result<SfmSolution> {
        let start = Instant::now();
        let out = oracles.get(i).sfm(inst.potential(i), w);
        self.record(i, start);
        if matches!(&out, Ok(s) if !s.exact) {
            self.inexact.fetch_add(1, Ordering::Relaxed);
        }
        out
    }

    pub fn calls(&self) -> Vec<u64> {
        self.calls
            .iter()
            .map(|c| c.load(Ordering::Relaxed))
            .collect()
    }

    pub fn total_calls(&self) -> u64 {
        self.calls().iter().sum()
    }

    pub fn inexact_answers(&self) -> u64 {
        self.inexact.load(Ordering::Relaxed)
    }

    /// Total oracle seconds, mean and max per-block seconds per call.
    pub fn timing(&self) -> (f64, f64, f64) {
        let mut total = 0.0;
        let mut means = Vec::new();
        for (c, t) in self.calls.iter().zip(&self.nanos) {
            let c = c.load(Ordering::Relaxed);
            let secs = t.load(Ordering::Relaxed) as f64 * 1e-9;
            total += secs;
            if c > 0 {
                means.push(secs / c as f64);
            }
        }
        let avg = if means.is_empty() {
            0.0
        } else {
            means.iter().sum::<f64>() / means.len() as f64
        };
        let max = means.iter().copied().fold(0.0, f64::max);
        (total, avg, max)
    }

    /// Fills the metering fields of a report.
    pub fn fill(&self, report: &mut SolveReport) {
        report.oracle_calls = self.calls();
        report.oracle_calls_total = self.total_calls();
        let (total, avg, max) = self.timing();
        report.oracle_seconds = total;
        report.oracle_time_avg = avg;
        report.oracle_time_max = max;
        report.inexact_oracle_answers = self.inexact_answers();
    }
}

impl SolveReport {
    pub(crate) fn empty(solver: &str) -> Self {
        SolveReport {
            solver: solver.to_string(),
            minimizer: Vec::new(),
            value: 0.0,
            objective: 0.0,
            gap: 0.0,
            iterations: 0,
            oracle_calls: Vec::new(),
            oracle_calls_total: 0,
            oracle_seconds: 0.0,
            oracle_time_avg: 0.0,
            oracle_time_max: 0.0,
            inexact_oracle_answers: 0,
            wall_seconds: 0.0,
            certified: true,
            warnings: Vec::new(),
            checkpoints: Vec::new(),
            point: None,
        }
    }
}

pub trait Level1Solver: Send + Sync {
    fn name(&self) -> &'static str;

    fn family(&self) -> SolverFamily;

    fn solve(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        opts: &SolveOptions,
    ) -> Result<SolveReport>;
}

/// Level-1 solvers selectable by name.
#[derive(Clone)]
pub struct SolverRegistry {
    solvers: BTreeMap<String, Arc<dyn Level1Solver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: BTreeMap::new(),
        }
    }

    /// `ekd`, `ibfs`, `rcdm`, `acdm` and `ap`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(crate::flow::EkdSolver));
        reg.register(Arc::new(crate::flow::IbfsSolver));
        reg.register(Arc::new(crate::gradient::RcdmSolver));
        reg.register(Arc::new(crate::gradient::AcdmSolver));
        reg.register(Arc::new(crate::gradient::ApSolver));
        reg
    }

    pub fn register(&mut self, solver: Arc<dyn Level1Solver>) {
        self.solvers.insert(solver.name().to_string(), solver);
    }

    pub fn names(&self) -> Vec<&str> {
        self.solvers.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Level1Solver>> {
        self.solvers.get(name).cloned().ok_or_else(|| {
            DsfmError::Input(format!(
                "unknown solver '{name}' (known: {})",
                self.names().join(", ")
            ))
        })
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// `Σ_v min(x(v), 0)`: a lower bound on `min f` for any `x ∈ B(f)`.
pub fn negative_part_sum(x: &[f64]) -> f64 {
    x.iter().map(|&v| v.min(0.0)).sum()
}
