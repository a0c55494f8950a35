//! Executable checks of the condition-number bounds: the min-norm point `s*`,
//! transport of a block vector onto `{x ∈ 𝒫 : Ax = s*}` by augmenting paths,
//! certified `κ` ratios and the restricted strong convexity surrogate.

mod path_family;

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use path_family::{alternating_path_instance, tent_point, AlternatingPathCut};

use crate::base::{greedy_vertex, BaseLmo, BlockVector};
use crate::error::{DsfmError, Result};
use crate::flow::{run_augmentations, AuxiliaryGraph, ShortestPathFinder, TAU_FLOW};
use crate::gradient::RcdmState;
use crate::instance::DecomposableInstance;
use crate::level0::{fujishige_wolfe, OracleRequest, OracleTable};
use crate::minnorm::{LinearMinimizer, WolfeParams};
use crate::set_function::SetFunction;
use crate::solver::OracleMeter;

/// Default diagnostics tolerance.
pub const TAU_D: f64 = 1e-6;

/// Largest ground set for which `s*` is cross-checked by whole-function Wolfe.
pub const CROSS_CHECK_MAX_N: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct SstarResult {
    pub sstar: Vec<f64>,
    /// Decomposition `y ∈ 𝒫` with `Ay = s*`.
    #[serde(skip)]
    pub blocks: BlockVector,
    /// Wolfe gap `||x||² - min_{q ∈ B(f)} <x, q>` at the returned point; bounds `||x - s*||²`.
    pub wolfe_gap: f64,
    pub iterations: usize,
    /// Max coordinate difference to whole-function Wolfe (small `n` only).
    pub cross_check: Option<f64>,
}

/// Wolfe gap of `x ∈ B(f)`: `||x||² - min_{q ∈ B(f)} <x, q>`.
pub fn wolfe_gap(inst: &DecomposableInstance, x: &[f64]) -> f64 {
    let whole = inst.as_whole();
    let q = BaseLmo(&whole).argmin(x);
    let xx: f64 = x.iter().map(|a| a * a).sum();
    let xq: f64 = x.iter().zip(&q).map(|(a, b)| a * b).sum();
    (xx - xq).max(0.0)
}

/// Wolfe-gap target `1e-12·(1 + M²)` with `M` the largest coordinate of the
/// greedy start in magnitude.
pub fn default_precision(inst: &DecomposableInstance) -> f64 {
    let m = inst
        .greedy_start()
        .aggregate()
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    1e-12 * (1.0 + m * m)
}

/// Min-norm point of `B(f)` by coordinate descent, run until the Wolfe gap
/// drops to `precision` (checked every `r` steps).
pub fn compute_sstar(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    precision: f64,
    max_steps: usize,
    seed: u64,
) -> Result<SstarResult> {
    if precision.is_nan() || precision <= 0.0 {
        return Err(DsfmError::Input("precision must be positive".into()));
    }
    let r = inst.r();
    let mut st = RcdmState::new(inst, oracles, inst.greedy_start(), seed)?;
    let mut gap = wolfe_gap(inst, st.y().aggregate());
    while gap > precision {
        if st.steps >= max_steps {
            return Err(DsfmError::Convergence(format!(
                "min-norm point: Wolfe gap {gap:.3e} after {} steps (target {precision:.1e})",
                st.steps
            )));
        }
        for _ in 0..r {
            st.step()?;
        }
        gap = wolfe_gap(inst, st.y().aggregate());
    }
    let mut blocks = st.y().clone();
    blocks.refresh_aggregate(&inst.supports());
    let sstar = blocks.aggregate().to_vec();
    let cross_check = if inst.n() <= CROSS_CHECK_MAX_N {
        let whole = inst.as_whole();
        let zero = vec![0.0; inst.n()];
        let res = fujishige_wolfe(
            &whole,
            &OracleRequest {
                shift: &zero,
                params: WolfeParams {
                    eps: 1e-14,
                    ..Default::default()
                },
                warm_start: None,
            },
        )?;
        Some(
            res.point
                .iter()
                .zip(&sstar)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(SstarResult {
        sstar,
        blocks,
        wolfe_gap: gap,
        iterations: st.steps,
        cross_check,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Transport {
    #[serde(skip)]
    pub x: BlockVector,
    pub augmentations: usize,
    /// `||Ay - s*||₁`.
    pub residual_l1: f64,
    pub residual_l2: f64,
    pub dist_l2: f64,
    pub dist_l1: f64,
    pub dist_linf: f64,
    /// `(√n/2)·||Ay - s*||₁`.
    pub lemma_bound: f64,
    /// `√((n-1)/2)·||Ay - s*||₁`, which accounts for both endpoints of each arc.
    pub arc_count_bound: f64,
    /// `max_v |(Ax)(v) - s*(v)|`.
    pub target_error: f64,
}

impl Transport {
    pub fn within_lemma_bound(&self, tol: f64) -> bool {
        self.dist_l2 <= self.lemma_bound + tol
    }

    /// `||x - y||_∞ ≤ ||Ay - s*||₁/2`.
    pub fn linf_step_bound_holds(&self, tol: f64) -> bool {
        self.dist_linf <= self.residual_l1 / 2.0 + tol
    }

    /// `||x - y||₁ ≤ n·||Ay - s*||₁/2`.
    pub fn l1_step_bound_holds(&self, n: usize, tol: f64) -> bool {
        self.dist_l1 <= n as f64 * self.residual_l1 / 2.0 + tol
    }
}

/// Moves `y ∈ 𝒫` to some `x ∈ 𝒫` with `Ax = target` by shortest augmenting
/// paths from `{v : (Ax)(v) < target(v)}` to `{v : (Ax)(v) > target(v)}`.
pub fn decompose_transport(
    inst: &DecomposableInstance,
    oracles: &OracleTable,
    y: &BlockVector,
    target: &[f64],
) -> Result<Transport> {
    let n = inst.n();
    let meter = OracleMeter::new(inst.r());
    let mut g = AuxiliaryGraph::new(inst, oracles, &meter, y.clone(), target.to_vec())?;
    let outcome = run_augmentations(&mut g, &mut ShortestPathFinder, usize::MAX, false)?;
    if !g.sources().is_empty() {
        return Err(DsfmError::Internal(format!(
            "no augmenting path while a deficit of {:.3e} remains: target outside B(f) or \
             inexact level-0 answers",
            g.total_deficit()
        )));
    }
    let x = g.into_point();
    let residual: Vec<f64> = y
        .aggregate()
        .iter()
        .zip(target)
        .map(|(a, b)| a - b)
        .collect();
    let residual_l1: f64 = residual.iter().map(|d| d.abs()).sum();
    let residual_l2 = residual.iter().map(|d| d * d).sum::<f64>().sqrt();
    let diffs = y
        .blocks()
        .iter()
        .zip(x.blocks())
        .flat_map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q).abs()));
    let (mut l1, mut l2, mut linf) = (0.0f64, 0.0f64, 0.0f64);
    for d in diffs {
        l1 += d;
        l2 += d * d;
        linf = linf.max(d);
    }
    let target_error = x
        .aggregate()
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Transport {
        augmentations: outcome.augmentations,
        residual_l1,
        residual_l2,
        dist_l2: l2.sqrt(),
        dist_l1: l1,
        dist_linf: linf,
        lemma_bound: (n as f64).sqrt() / 2.0 * residual_l1,
        arc_count_bound: ((n.saturating_sub(1)) as f64 / 2.0).sqrt() * residual_l1,
        target_error,
        x,
    })
}

/// Instance, oracles, `s*` and a decomposition of it.
pub struct DiagnosticsContext<'a> {
    pub inst: &'a DecomposableInstance,
    pub oracles: &'a OracleTable,
    pub sstar: SstarResult,
    pub tau: f64,
}

impl<'a> DiagnosticsContext<'a> {
    pub fn new(inst: &'a DecomposableInstance, oracles: &'a OracleTable) -> Result<Self> {
        let sstar = compute_sstar(
            inst,
            oracles,
            default_precision(inst),
            1000 * inst.r() * inst.n().pow(2),
            0,
        )?;
        Ok(DiagnosticsContext {
            inst,
            oracles,
            sstar,
            tau: TAU_D,
        })
    }

    /// Context from a known decomposition `y ∈ 𝒫` of the min-norm point.
    pub fn from_decomposition(
        inst: &'a DecomposableInstance,
        oracles: &'a OracleTable,
        mut blocks: BlockVector,
    ) -> Result<Self> {
        if blocks.num_blocks() != inst.r() || blocks.aggregate().len() != inst.n() {
            return Err(DsfmError::Input(
                "decomposition does not match instance".into(),
            ));
        }
        blocks.refresh_aggregate(&inst.supports());
        let sstar = blocks.aggregate().to_vec();
        Ok(DiagnosticsContext {
            inst,
            oracles,
            sstar: SstarResult {
                wolfe_gap: wolfe_gap(inst, &sstar),
                sstar,
                blocks,
                iterations: 0,
                cross_check: None,
            },
            tau: TAU_D,
        })
    }

    /// `n√r/2 + 1`.
    pub fn kappa_bound(&self) -> f64 {
        self.inst.n() as f64 * (self.inst.r() as f64).sqrt() / 2.0 + 1.0
    }

    /// Case `y ∈ 𝒫`: `||x - y|| / (||Ay - s*||/√r)` with `x` from transport.
    pub fn ratio_in_p(&self, y: &BlockVector) -> Result<Option<KappaSample>> {
        let t = decompose_transport(self.inst, self.oracles, y, &self.sstar.sstar)?;
        let denom = t.residual_l2 / (self.inst.r() as f64).sqrt();
        if denom <= self.tau {
            return Ok(None);
        }
        Ok(Some(KappaSample {
            case: KappaCase::Polytope,
            numerator: t.dist_l2,
            denominator: denom,
            ratio: t.dist_l2 / denom,
        }))
    }

    /// Case `Ay = s*`: `||x - y|| / d(y, 𝒫)` with `x` from transport of `Π_𝒫(y)`.
    pub fn ratio_in_a(&self, y: &BlockVector) -> Result<Option<KappaSample>> {
        let meter = OracleMeter::new(self.inst.r());
        let mut proj = Vec::with_capacity(self.inst.r());
        for i in 0..self.inst.r() {
            let w: Vec<f64> = y.block(i).iter().map(|v| -v).collect();
            proj.push(meter.quadratic(self.inst, self.oracles, i, &w, None)?.point);
        }
        let q = self.inst.block_vector(proj)?;
        let denom = q.distance(y);
        if denom <= self.tau {
            return Ok(None);
        }
        let t = decompose_transport(self.inst, self.oracles, &q, &self.sstar.sstar)?;
        let numerator = t.x.distance(y);
        Ok(Some(KappaSample {
            case: KappaCase::Subspace,
            numerator,
            denominator: denom,
            ratio: numerator / denom,
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaCase {
    /// `y ∈ 𝒫`.
    Polytope,
    /// `Ay = s*`.
    Subspace,
}

/// One certified ratio: an upper bound on `d(y, ℰ)` over the exact denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaSample {
    pub case: KappaCase,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaStats {
    pub n: usize,
    pub r: usize,
    pub bound: f64,
    pub samples: usize,
    /// Samples already in `ℰ` (zero denominator), skipped.
    pub skipped: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub violations: usize,
    pub ratios: Vec<f64>,
}

/// Random point of `𝒫`: per block a greedy vertex for random weights, or a
/// random convex combination of up to three of them.
pub fn sample_in_p(inst: &DecomposableInstance, rng: &mut impl Rng) -> BlockVector {
    let unit = Uniform::new(-1.0f64, 1.0);
    let blocks = inst
        .potentials()
        .iter()
        .map(|p| {
            let k = p.support_len();
            let m = rng.gen_range(1..=3);
            let mut lambda: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= s);
            let mut out = vec![0.0; k];
            for l in lambda {
                let w: Vec<f64> = (0..k).map(|_| unit.sample(rng)).collect();
                let v = greedy_vertex(p, &w).expect("finite weights");
                out.iter_mut().zip(&v).for_each(|(o, x)| *o += l * x);
            }
            out
        })
        .collect();
    inst.block_vector(blocks)
        .expect("blocks shaped like the instance")
}

/// `ystar + δ` with `Aδ = 0`: random block noise projected onto the null space.
pub fn sample_in_a(
    inst: &DecomposableInstance,
    ystar: &BlockVector,
    scale: f64,
    rng: &mut impl Rng,
) -> BlockVector {
    let unit = Uniform::new(-scale, scale);
    let noise: Vec<Vec<f64>> = inst
        .potentials()
        .iter()
        .map(|p| (0..p.support_len()).map(|_| unit.sample(rng)).collect())
        .collect();
    let noise = inst
        .block_vector(noise)
        .expect("blocks shaped like the instance");
    let agg = noise.aggregate();
    let blocks = inst
        .potentials()
        .iter()
        .zip(noise.blocks().iter().zip(ystar.blocks()))
        .map(|(p, (nb, yb))| {
            p.support()
                .iter()
                .zip(nb.iter().zip(yb))
                .map(|(&v, (d, y))| y + d - agg[v] / inst.degree(v) as f64)
                .collect()
        })
        .collect();
    inst.block_vector(blocks)
        .expect("blocks shaped like the instance")
}

/// Certified ratios on `samples` random points, alternating between `y ∈ 𝒫`
/// and `Ay = s*`. Every ratio should stay below `n√r/2 + 1`.
pub fn estimate_kappa(ctx: &DiagnosticsContext, samples: usize, seed: u64) -> Result<KappaStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = ctx.kappa_bound();
    let scale = 1.0 + ctx.sstar.sstar.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut ratios = Vec::with_capacity(samples);
    let mut skipped = 0;
    for k in 0..samples {
        let sample = if k % 2 == 0 {
            ctx.ratio_in_p(&sample_in_p(ctx.inst, &mut rng))?
        } else {
            let y = sample_in_a(ctx.inst, &ctx.sstar.blocks, scale, &mut rng);
            ctx.ratio_in_a(&y)?
        };
        match sample {
            Some(s) => ratios.push(s.ratio),
            None => skipped += 1,
        }
    }
    let violations = ratios.iter().filter(|&&q| q > bound + ctx.tau).count();
    Ok(KappaStats {
        n: ctx.inst.n(),
        r: ctx.inst.r(),
        bound,
        samples,
        skipped,
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        mean_ratio: if ratios.is_empty() {
            0.0
        } else {
            ratios.iter().sum::<f64>() / ratios.len() as f64
        },
        violations,
        ratios,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportStats {
    pub n: usize,
    pub samples: usize,
    /// Samples whose transport missed `s*` by more than `τ`.
    pub target_misses: usize,
    /// Violations of `||x - y||₂ ≤ (√n/2)||Ay - s*||₁ + τ`.
    pub lemma_violations: usize,
    /// Largest `||x - y||₂ / ((√n/2)||Ay - s*||₁)`.
    pub max_lemma_ratio: f64,
    pub arc_count_violations: usize,
    pub linf_violations: usize,
    pub l1_violations: usize,
    pub max_augmentations: usize,
}

/// Transports random `y ∈ 𝒫` onto `Ax = s*` and checks the distance bounds.
pub fn check_transport(
    ctx: &DiagnosticsContext,
    samples: usize,
    seed: u64,
) -> Result<TransportStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ctx.inst.n();
    let mut st = TransportStats {
        n,
        samples,
        target_misses: 0,
        lemma_violations: 0,
        max_lemma_ratio: 0.0,
        arc_count_violations: 0,
        linf_violations: 0,
        l1_violations: 0,
        max_augmentations: 0,
    };
    for _ in 0..samples {
        let y = sample_in_p(ctx.inst, &mut rng);
        let t = decompose_transport(ctx.inst, ctx.oracles, &y, &ctx.sstar.sstar)?;
        st.target_misses += usize::from(t.target_error > ctx.tau);
        st.lemma_violations += usize::from(!t.within_lemma_bound(ctx.tau));
        st.arc_count_violations += usize::from(t.dist_l2 > t.arc_count_bound + ctx.tau);
        st.linf_violations += usize::from(!t.linf_step_bound_holds(ctx.tau));
        st.l1_violations += usize::from(!t.l1_step_bound_holds(n, ctx.tau));
        if t.lemma_bound > 0.0 {
            st.max_lemma_ratio = st.max_lemma_ratio.max(t.dist_l2 / t.lemma_bound);
        }
        st.max_augmentations = st.max_augmentations.max(t.augmentations);
    }
    Ok(st)
}

#[derive(Debug, Clone, Serialize)]
pub struct EllStats {
    pub n: usize,
    pub samples: usize,
    /// Largest `||y - x||² / ||A(y - x)||²`; the bound is `n²/4`.
    pub max_ratio: f64,
    pub bound: f64,
    pub violations: usize,
    /// Largest `||y - x||² - (n²/4)||A(y - x)||²`.
    pub worst_excess: f64,
}

/// Checks `||y - x||² ≤ (n²/4)||A(y - x)||² + τ` for random `y ∈ 𝒫`, with
/// `x` the transport of `y` onto `Ax = s*` standing in for the projection.
pub fn check_ell(ctx: &DiagnosticsContext, samples: usize, seed: u64) -> Result<EllStats> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ctx.inst.n() as f64;
    let bound = n * n / 4.0;
    let mut max_ratio: f64 = 0.0;
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..samples {
        let y = sample_in_p(ctx.inst, &mut rng);
        let t = decompose_transport(ctx.inst, ctx.oracles, &y, &ctx.sstar.sstar)?;
        let lhs = t.dist_l2 * t.dist_l2;
        let rhs = t.residual_l2 * t.residual_l2;
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
        let excess = lhs - bound * rhs;
        worst = worst.max(excess);
        if excess > ctx.tau {
            violations += 1;
        }
    }
    Ok(EllStats {
        n: ctx.inst.n(),
        samples,
        max_ratio,
        bound,
        violations,
        worst_excess: if samples == 0 { 0.0 } else { worst },
    })
}

/// Whether the transport drove every deficit below the flow threshold.
pub fn transport_reached_target(t: &Transport) -> bool {
    t.target_error <= TAU_FLOW * 10.0
}
