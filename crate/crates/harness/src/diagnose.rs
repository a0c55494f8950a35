//! Condition-number diagnostics for an instance.

use dsfm_core::diagnostics::{
    check_ell, check_transport, estimate_kappa, DiagnosticsContext, EllStats, KappaStats,
    SstarResult, TransportStats,
};
use dsfm_core::level0::OracleTable;
use dsfm_core::DecomposableInstance;
use serde::Serialize;

use crate::error::Result;

pub const DIAGNOSE_SCHEMA: &str = "dsfm-diagnose/1";

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub schema: &'static str,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub sstar: SstarResult,
    pub transport: TransportStats,
    pub kappa: KappaStats,
    pub ell: EllStats,
}

impl DiagnoseReport {
    pub fn violations(&self) -> usize {
        self.transport.lemma_violations + self.kappa.violations + self.ell.violations
    }
}

pub fn diagnose(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    samples: usize,
    seed: u64,
) -> Result<DiagnoseReport> {
    let ctx = DiagnosticsContext::new(inst, oracles)?;
    let transport = check_transport(&ctx, samples, seed)?;
    let kappa = estimate_kappa(&ctx, samples, seed.wrapping_add(1))?;
    let ell = check_ell(&ctx, samples, seed.wrapping_add(2))?;
    Ok(DiagnoseReport {
        schema: DIAGNOSE_SCHEMA,
        n: inst.n(),
        r: inst.r(),
        seed,
        sstar: ctx.sstar,
        transport,
        kappa,
        ell,
    })
}

pub fn render(rep: &DiagnoseReport) -> String {
    let t = &rep.transport;
    let k = &rep.kappa;
    let e = &rep.ell;
    format!(
        "n = {}, r = {}\n\
         min-norm point: Wolfe gap {:.3e} after {} steps\n\
         transport: {} samples, {} bound violations (max ratio {:.4}), {} target misses\n\
         kappa: max certified ratio {:.4} (mean {:.4}), bound {:.4}, {} violations, {} skipped\n\
         ell: max ratio {:.4}, bound {:.4}, {} violations\n",
        rep.n,
        rep.r,
        rep.sstar.wolfe_gap,
        rep.sstar.iterations,
        t.samples,
        t.lemma_violations,
        t.max_lemma_ratio,
        t.target_misses,
        k.max_ratio,
        k.mean_ratio,
        k.bound,
        k.violations,
        k.skipped,
        e.max_ratio,
        e.bound,
        e.violations,
    )
}
