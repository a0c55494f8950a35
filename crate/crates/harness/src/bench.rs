//! Benchmark runner: solvers × oracle policies × trials, summarized per
//! iteration budget.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dsfm_core::level0::{OraclePolicy, OracleRegistry, OracleTable};
use dsfm_core::solver::SolverFamily;
use dsfm_core::{DecomposableInstance, SolveOptions, SolveReport, SolverRegistry};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::format::load_instance;
use crate::ingest::{image_to_instance, load_raster, IngestParams};

pub const BENCH_SCHEMA: &str = "dsfm-bench/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Gradient budgets as multiples of `r`.
    #[serde(default = "default_budgets")]
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub strict: bool,
    #[serde(rename = "run")]
    pub runs: Vec<RunConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    /// Instance file; exclusive with `image`.
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub image: Option<PathBuf>,
    #[serde(default)]
    pub ingest: IngestParams,
    pub solvers: Vec<String>,
    /// Oracle spec per potential kind (or `all`), e.g. `region = "wolfe:10:warm"`.
    #[serde(default)]
    pub oracles: BTreeMap<String, String>,
}

fn default_trials() -> usize {
    10
}

fn default_budgets() -> Vec<usize> {
    vec![5, 10, 100, 1000]
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchmarkConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; relative paths are resolved against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for run in &mut cfg.runs {
            for p in [&mut run.instance, &mut run.image].into_iter().flatten() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.budgets.is_empty() || self.budgets.contains(&0) {
            return bad("budgets must be non-empty multiples of r, each at least 1".into());
        }
        if self.runs.is_empty() {
            return bad("no [[run]] sections".into());
        }
        let solvers = SolverRegistry::builtin();
        let oracles = OracleRegistry::builtin();
        for run in &self.runs {
            if run.instance.is_some() == run.image.is_some() {
                return bad(format!(
                    "run '{}': give exactly one of instance or image",
                    run.label
                ));
            }
            if run.solvers.is_empty() {
                return bad(format!("run '{}': no solvers", run.label));
            }
            for s in &run.solvers {
                solvers.get(s)?;
            }
            for (_, spec) in run.policy()?.entries() {
                oracles.build(spec)?;
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn policy(&self) -> Result<OraclePolicy> {
        let mut policy = OraclePolicy::default();
        if let Some(all) = self.oracles.get("all") {
            policy.apply_assignment(&format!("all={all}"))?;
        }
        for (kind, spec) in self.oracles.iter().filter(|(k, _)| k.as_str() != "all") {
            policy.apply_assignment(&format!("{kind}={spec}"))?;
        }
        Ok(policy)
    }

    pub fn load_instance(&self) -> Result<DecomposableInstance> {
        match (&self.instance, &self.image) {
            (Some(p), None) => load_instance(p),
            (None, Some(p)) => image_to_instance(&load_raster(p)?, &self.ingest),
            _ => Err(HarnessError::Config(format!(
                "run '{}': give exactly one of instance or image",
                self.label
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub run: String,
    pub solver: String,
    pub trial: usize,
    pub seed: u64,
    pub report: Option<SolveReport>,
    pub error_category: Option<String>,
    pub error: Option<String>,
}

/// One table row: a solver at one budget (gradient) or to completion (flow).
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub run: String,
    pub solver: String,
    pub oracles: String,
    /// Budget as a multiple of `r`; `None` for flow solvers.
    pub budget_r: Option<usize>,
    pub iterations: Option<usize>,
    pub trials_ok: usize,
    pub trials: usize,
    pub mean_seconds: f64,
    pub mean_value: f64,
    pub mean_gap: f64,
    pub mean_oracle_calls: f64,
    pub certified: bool,
    /// Some trial failed; means cover the successful ones only.
    pub incomplete: bool,
}

/// Boolean outcomes checked across runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Findings {
    /// On runs with exact oracles: the fastest flow solver beats every
    /// gradient solver at the largest budget. `None` without such a run.
    pub flow_faster_than_descent: Option<bool>,
    /// On runs with inexact oracles: every flow trial either failed with an
    /// exactness error or is marked uncertified.
    pub inexact_flow_flagged: Option<bool>,
    /// On runs with inexact oracles: every gradient trial finished with a
    /// finite gap.
    pub inexact_descent_completes: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema: &'static str,
    pub trials: usize,
    pub budgets: Vec<usize>,
    pub rows: Vec<SummaryRow>,
    pub findings: Findings,
    pub records: Vec<TrialRecord>,
}

struct RunOutcome {
    exact: bool,
    flow_times: Vec<f64>,
    descent_times: Vec<f64>,
    flow_flagged: bool,
    descent_finite: bool,
    has_flow: bool,
    has_descent: bool,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 {
        f64::NAN
    } else {
        s / k as f64
    }
}

fn describe_policy(policy: &OraclePolicy, inst: &DecomposableInstance) -> String {
    let kinds: std::collections::BTreeSet<_> = inst.kinds().into_iter().collect();
    policy
        .entries()
        .filter(|(k, _)| kinds.contains(k))
        .map(|(k, s)| format!("{k}={s}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Runs every configured solver `trials` times per run; trial `t` uses seed
/// `seed + t`. Trials run sequentially.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let solvers = SolverRegistry::builtin();
    let oracle_registry = OracleRegistry::builtin();
    let max_budget = *cfg.budgets.iter().max().expect("validated");
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut outcomes = Vec::new();

    for run in &cfg.runs {
        let inst = run.load_instance()?;
        let policy = run.policy()?;
        let oracles: OracleTable = policy.build(&oracle_registry, &inst)?;
        let r = inst.r();
        let oracle_desc = describe_policy(&policy, &inst);
        let mut outcome = RunOutcome {
            exact: oracles.all_exact(),
            flow_times: Vec::new(),
            descent_times: Vec::new(),
            flow_flagged: true,
            descent_finite: true,
            has_flow: false,
            has_descent: false,
        };

        for name in &run.solvers {
            let solver = solvers.get(name)?;
            let family = solver.family();
            let mut reports: Vec<SolveReport> = Vec::new();
            for t in 0..cfg.trials {
                let seed = cfg.seed + t as u64;
                let opts = SolveOptions {
                    seed,
                    strict: cfg.strict,
                    iterations: (family == SolverFamily::Gradient).then_some(max_budget * r),
                    checkpoints: cfg.budgets.iter().map(|b| b * r).collect(),
                    ..Default::default()
                };
                let result = solver.solve(&inst, &oracles, &opts);
                let (report, category, error) = match result {
                    Ok(mut rep) => {
                        rep.point = None;
                        (Some(rep), None, None)
                    }
                    Err(e) => (None, Some(e.category().to_string()), Some(e.to_string())),
                };
                match family {
                    SolverFamily::Flow => {
                        outcome.has_flow = true;
                        let flagged = match (&report, category.as_deref()) {
                            (Some(rep), _) => !rep.certified,
                            (None, Some("oracle_exactness")) => true,
                            _ => false,
                        };
                        outcome.flow_flagged &= flagged;
                    }
                    SolverFamily::Gradient => {
                        outcome.has_descent = true;
                        outcome.descent_finite &=
                            report.as_ref().is_some_and(|r| r.gap.is_finite());
                    }
                }
                if let Some(rep) = &report {
                    reports.push(rep.clone());
                }
                records.push(TrialRecord {
                    run: run.label.clone(),
                    solver: name.clone(),
                    trial: t,
                    seed,
                    report,
                    error_category: category,
                    error,
                });
            }

            let incomplete = reports.len() < cfg.trials;
            let certified = !reports.is_empty() && reports.iter().all(|r| r.certified);
            match family {
                SolverFamily::Flow => {
                    let secs = mean(reports.iter().map(|r| r.wall_seconds));
                    outcome.flow_times.push(secs);
                    rows.push(SummaryRow {
                        run: run.label.clone(),
                        solver: name.clone(),
                        oracles: oracle_desc.clone(),
                        budget_r: None,
                        iterations: None,
                        trials_ok: reports.len(),
                        trials: cfg.trials,
                        mean_seconds: secs,
                        mean_value: mean(reports.iter().map(|r| r.value)),
                        mean_gap: mean(reports.iter().map(|r| r.gap)),
                        mean_oracle_calls: mean(
                            reports.iter().map(|r| r.oracle_calls_total as f64),
                        ),
                        certified,
                        incomplete,
                    });
                }
                SolverFamily::Gradient => {
                    for &b in &cfg.budgets {
                        let at: Vec<_> = reports
                            .iter()
                            .filter_map(|rep| {
                                rep.checkpoints.iter().find(|c| c.iterations == b * r)
                            })
                            .collect();
                        let secs = mean(at.iter().map(|c| c.seconds));
                        if b == max_budget {
                            outcome.descent_times.push(secs);
                        }
                        rows.push(SummaryRow {
                            run: run.label.clone(),
                            solver: name.clone(),
                            oracles: oracle_desc.clone(),
                            budget_r: Some(b),
                            iterations: Some(b * r),
                            trials_ok: at.len(),
                            trials: cfg.trials,
                            mean_seconds: secs,
                            mean_value: mean(at.iter().map(|c| c.value)),
                            mean_gap: mean(at.iter().map(|c| c.gap)),
                            mean_oracle_calls: (b * r) as f64,
                            certified,
                            incomplete: at.len() < cfg.trials,
                        });
                    }
                }
            }
        }
        outcomes.push(outcome);
    }

    Ok(BenchReport {
        schema: BENCH_SCHEMA,
        trials: cfg.trials,
        budgets: cfg.budgets.clone(),
        rows,
        findings: findings(&outcomes),
        records,
    })
}

fn findings(outcomes: &[RunOutcome]) -> Findings {
    let all = |it: Vec<bool>| (!it.is_empty()).then(|| it.iter().all(|&b| b));
    let flow_faster = outcomes
        .iter()
        .filter(|o| o.exact && o.has_flow && o.has_descent)
        .map(|o| {
            let best_flow = o.flow_times.iter().copied().fold(f64::INFINITY, f64::min);
            o.descent_times.iter().all(|&d| best_flow < d)
        })
        .collect();
    let inexact: Vec<&RunOutcome> = outcomes.iter().filter(|o| !o.exact).collect();
    Findings {
        flow_faster_than_descent: all(flow_faster),
        inexact_flow_flagged: all(inexact
            .iter()
            .filter(|o| o.has_flow)
            .map(|o| o.flow_flagged)
            .collect()),
        inexact_descent_completes: all(inexact
            .iter()
            .filter(|o| o.has_descent)
            .map(|o| o.descent_finite)
            .collect()),
    }
}

fn fmt_opt(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

/// Human-readable tables, one block per run.
pub fn render_tables(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "averaged over {} trials", report.trials);
    let mut current = None;
    for row in &report.rows {
        if current != Some(&row.run) {
            current = Some(&row.run);
            let _ = writeln!(out, "\n[{}] oracles: {}", row.run, row.oracles);
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>12} {:>16} {:>12} {:>14}  status",
                "solver", "# iter", "time (s)", "value", "gap", "oracle calls"
            );
        }
        let iter = row
            .budget_r
            .map_or_else(|| "-".to_string(), |b| format!("{b}r"));
        let mut status = Vec::new();
        if row.incomplete {
            status.push(format!("incomplete {}/{}", row.trials_ok, row.trials));
        }
        if !row.certified {
            status.push("uncertified".to_string());
        }
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>12.6} {:>16.6} {:>12.3e} {:>14.0}  {}",
            row.solver,
            iter,
            row.mean_seconds,
            row.mean_value,
            row.mean_gap,
            row.mean_oracle_calls,
            if status.is_empty() {
                "ok".to_string()
            } else {
                status.join(", ")
            }
        );
    }
    let f = &report.findings;
    let _ = writeln!(
        out,
        "\nflow faster than descent at largest budget: {}",
        fmt_opt(f.flow_faster_than_descent)
    );
    let _ = writeln!(
        out,
        "inexact oracles flagged by flow solvers: {}",
        fmt_opt(f.inexact_flow_flagged)
    );
    let _ = writeln!(
        out,
        "descent completes with inexact oracles: {}",
        fmt_opt(f.inexact_descent_completes)
    );
    out
}
