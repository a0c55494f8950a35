//! Continuous level-1 solvers on `min ½||Ay||²` over `y ∈ ∏ B(f_i)`, with
//! level-set rounding and a certificate gap.

mod acdm;
mod ap;
mod rcdm;

use std::time::Instant;

pub use acdm::AcdmState;
pub use ap::ApState;
pub use rcdm::RcdmState;

use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::OracleTable;
use crate::solver::{
    negative_part_sum, Checkpoint, Level1Solver, OracleMeter, SolveOptions, SolveReport,
    SolverFamily,
};

/// Default step budget multiplier: `1000·r`.
pub const DEFAULT_ITERATIONS_PER_BLOCK: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Rounding {
    /// Sorted ids of the best level set.
    pub set: Vec<usize>,
    pub value: f64,
    /// `x⁻(V)`, a lower bound on `min f` when `x ∈ B(f)`.
    pub lower_bound: f64,
    /// `value - lower_bound`.
    pub gap: f64,
}

/// Best level set `{v : x(v) ≤ t}` over all thresholds `t`, with the
/// certificate gap `f(S) - x⁻(V)`.
///
/// Ties go to the smaller set.
pub fn round_and_certify(inst: &DecomposableInstance, x: &[f64]) -> Result<Rounding> {
    let n = inst.n();
    if x.len() != n {
        return Err(DsfmError::Input(
            "aggregate length differs from ground set".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let prefix = inst.prefix_values(&order);
    let mut best_k = 0;
    let mut best = prefix[0];
    for k in 1..=n {
        let closes_level = k == n || x[order[k - 1]] < x[order[k]];
        if closes_level && prefix[k] < best - 1e-12 * (1.0 + best.abs()) {
            best = prefix[k];
            best_k = k;
        }
    }
    let mut set = order[..best_k].to_vec();
    set.sort_unstable();
    let lower_bound = negative_part_sum(x);
    Ok(Rounding {
        set,
        value: best,
        lower_bound,
        gap: best - lower_bound,
    })
}

/// A continuous method advanced in units of block oracle calls.
pub trait ProxMethod {
    fn advance(&mut self, steps: usize) -> Result<()>;

    /// Current feasible point of `∏ B(f_i)`.
    fn point(&self) -> BlockVector;

    fn aggregate(&self) -> Vec<f64>;

    fn meter(&self) -> &OracleMeter;
}

pub(crate) fn initial_point(
    inst: &DecomposableInstance,
    opts: &SolveOptions,
) -> Result<BlockVector> {
    match &opts.initial {
        Some(y) => {
            if y.num_blocks() != inst.r() || y.aggregate().len() != inst.n() {
                return Err(DsfmError::Input(
                    "initial point does not match instance".into(),
                ));
            }
            Ok(y.clone())
        }
        None => Ok(inst.greedy_start()),
    }
}

fn drive(
    name: &str,
    inst: &DecomposableInstance,
    opts: &SolveOptions,
    method: &mut dyn ProxMethod,
) -> Result<SolveReport> {
    let start = Instant::now();
    let r = inst.r();
    let total = opts.iterations.unwrap_or(DEFAULT_ITERATIONS_PER_BLOCK * r);
    if total == 0 {
        return Err(DsfmError::Input(
            "iteration budget must be at least 1".into(),
        ));
    }
    let mut marks: Vec<usize> = opts
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > 0 && c <= total)
        .collect();
    marks.sort_unstable();
    marks.dedup();

    let mut report = SolveReport::empty(name);
    let mut done = 0;
    while done < total {
        let mut next = total;
        if let Some(&m) = marks.iter().find(|&&m| m > done) {
            next = next.min(m);
        }
        if opts.target_gap.is_some() {
            next = next.min((done / r + 1) * r);
        }
        method.advance(next - done)?;
        done = next;
        let rounding = if marks.binary_search(&done).is_ok() || opts.target_gap.is_some() {
            Some(round_and_certify(inst, &method.aggregate())?)
        } else {
            None
        };
        if let Some(rd) = &rounding {
            if marks.binary_search(&done).is_ok() {
                let agg = method.aggregate();
                report.checkpoints.push(Checkpoint {
                    iterations: done,
                    value: rd.value,
                    gap: rd.gap,
                    objective: 0.5 * agg.iter().map(|a| a * a).sum::<f64>(),
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
            if opts.target_gap.is_some_and(|t| rd.gap <= t) {
                break;
            }
        }
    }

    let y = method.point();
    let rd = round_and_certify(inst, y.aggregate())?;
    report.minimizer = rd.set;
    report.value = rd.value;
    report.gap = rd.gap;
    report.objective = y.half_squared_norm_of_aggregate();
    report.iterations = done;
    method.meter().fill(&mut report);
    if report.inexact_oracle_answers > 0 {
        report.warnings.push(format!(
            "{} level-0 answers were inexact; the gap still bounds suboptimality",
            report.inexact_oracle_answers
        ));
    }
    report.point = Some(y);
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Random coordinate descent: one exact block minimization per step.
#[derive(Debug, Clone, Copy, Default)]
pub struct RcdmSolver;

impl Level1Solver for RcdmSolver {
    fn name(&self) -> &'static str {
        "rcdm"
    }

    fn family(&self) -> SolverFamily {
        SolverFamily::Gradient
    }

    fn solve(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        opts: &SolveOptions,
    ) -> Result<SolveReport> {
        let mut state = RcdmState::new(inst, oracles, initial_point(inst, opts)?, opts.seed)?;
        drive(self.name(), inst, opts, &mut state)
    }
}

/// Accelerated coordinate descent with epoch restarts.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcdmSolver;

impl Level1Solver for AcdmSolver {
    fn name(&self) -> &'static str {
        "acdm"
    }

    fn family(&self) -> SolverFamily {
        SolverFamily::Gradient
    }

    fn solve(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        opts: &SolveOptions,
    ) -> Result<SolveReport> {
        let mut state = AcdmState::new(
            inst,
            oracles,
            initial_point(inst, opts)?,
            opts.seed,
            opts.acdm,
        )?;
        drive(self.name(), inst, opts, &mut state)
    }
}

/// Alternating projections between `∏ B(f_i)` and `{a : Aa = 0}`.
///
/// The budget counts block oracle calls, so one round costs `r` iterations.
#[derive(Debug, Clone, Copy, Default)]
pub struct ApSolver;

impl Level1Solver for ApSolver {
    fn name(&self) -> &'static str {
        "ap"
    }

    fn family(&self) -> SolverFamily {
        SolverFamily::Gradient
    }

    fn solve(
        &self,
        inst: &DecomposableInstance,
        oracles: &OracleTable,
        opts: &SolveOptions,
    ) -> Result<SolveReport> {
        let mut state = ApState::new(
            inst,
            oracles,
            initial_point(inst, opts)?,
            opts.parallel_threshold,
        )?;
        drive(self.name(), inst, opts, &mut state)
    }
}

pub fn solve_rcdm(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    RcdmSolver.solve(inst, oracles, opts)
}

pub fn solve_acdm(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    AcdmSolver.solve(inst, oracles, opts)
}

pub fn solve_ap(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    ApSolver.solve(inst, oracles, opts)
}
