//! Level-0 oracles: quadratic minimization `min_{y ∈ B(f_i)} ||y + w||²` and
//! set-function minimization `min_S f_i(S) + w(S)` for a single potential.
//!
//! Oracles are trait objects registered by name in an [`OracleRegistry`]; an
//! [`OraclePolicy`] picks one per potential kind and produces an
//! [`OracleTable`] with one oracle per block of an instance.

mod brute;
mod reduction;
mod wolfe;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force_sfm, max_abs_value, BruteForceOracle, MAX_BRUTE_SUPPORT};
pub use reduction::{quad_oracle_from_sfm, ReductionOutput};
pub use wolfe::{fujishige_wolfe, OracleRequest, WolfeOracle};

use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::minnorm::WolfeStats;
use crate::set_function::{PotentialKind, SetFunction};

/// Threshold below which a coordinate of the shifted min-norm point counts
/// as negative when reading off a minimizer.
pub const SFM_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct QuadSolution {
    /// Point of `B(f)` in local coordinates.
    pub point: Vec<f64>,
    /// `false` when the oracle stopped early (iteration cap).
    pub exact: bool,
    pub wolfe: Option<WolfeStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfmSolution {
    /// Local membership of the minimizer.
    pub members: Vec<bool>,
    /// `f(S) + w(S)`.
    pub value: f64,
    pub exact: bool,
}

pub trait Level0Oracle: Send + Sync + fmt::Debug {
    /// Spec string that rebuilds this oracle through the registry.
    fn name(&self) -> String;

    /// Whether every answer is optimal up to floating-point error.
    fn is_exact(&self) -> bool;

    fn quadratic(
        &self,
        f: &dyn SetFunction,
        w: &[f64],
        warm: Option<&[f64]>,
    ) -> Result<QuadSolution>;

    fn sfm(&self, f: &dyn SetFunction, w: &[f64]) -> Result<SfmSolution> {
        sfm_from_quad_oracle(self, f, w)
    }
}

/// Minimizer of `f + w` read off one quadratic oracle call.
///
/// With an exact point this is the set of negative coordinates of the
/// min-norm point of `B(f + w)`. Every level set along the sorted
/// coordinates is evaluated and the best one kept, ties to the smaller set,
/// so near-zero coordinates of an approximate point cannot flip the answer
/// to a worse set.
pub fn sfm_from_quad_oracle<O: Level0Oracle + ?Sized>(
    oracle: &O,
    f: &dyn SetFunction,
    w: &[f64],
) -> Result<SfmSolution> {
    let sol = oracle.quadratic(f, w, None)?;
    let shifted: Vec<f64> = sol.point.iter().zip(w).map(|(y, wv)| y + wv).collect();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| shifted[a].total_cmp(&shifted[b]).then(a.cmp(&b)));
    let chain = f.chain_values(&order);
    let negative = shifted.iter().filter(|&&v| v < -SFM_THRESHOLD).count();
    let mut prefix_w = 0.0;
    let mut values = Vec::with_capacity(w.len() + 1);
    values.push(chain[0]);
    for (k, &j) in order.iter().enumerate() {
        prefix_w += w[j];
        values.push(chain[k + 1] + prefix_w);
    }
    let mut best_k = negative;
    for (k, &v) in values.iter().enumerate() {
        let best = values[best_k];
        let tol = 1e-12 * (1.0 + best.abs());
        if v < best - tol || (k < best_k && v <= best + tol) {
            best_k = k;
        }
    }
    let mut members = vec![false; w.len()];
    for &j in &order[..best_k] {
        members[j] = true;
    }
    let value = f.eval_local(&members)
        + members
            .iter()
            .zip(w)
            .filter(|(&m, _)| m)
            .map(|(_, wv)| wv)
            .sum::<f64>();
    Ok(SfmSolution {
        members,
        value,
        exact: sol.exact,
    })
}

/// Function-specific closed forms and algorithms.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpecificOracle;

impl Level0Oracle for SpecificOracle {
    fn name(&self) -> String {
        "specific".into()
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn quadratic(
        &self,
        f: &dyn SetFunction,
        w: &[f64],
        _warm: Option<&[f64]>,
    ) -> Result<QuadSolution> {
        let point = f.specialized_min_norm(w).ok_or_else(|| {
            DsfmError::Capability(format!("no specific oracle for {} potentials", f.kind()))
        })?;
        Ok(QuadSolution {
            point,
            exact: true,
            wolfe: None,
        })
    }
}

type OracleFactory = Box<dyn Fn(&[&str]) -> Result<Arc<dyn Level0Oracle>> + Send + Sync>;

/// Named level-0 oracle constructors.
///
/// Spec strings look like `name` or `name:arg:arg`, e.g. `wolfe:10:warm`.
pub struct OracleRegistry {
    factories: BTreeMap<String, OracleFactory>,
}

impl OracleRegistry {
    pub fn empty() -> Self {
        OracleRegistry {
            factories: BTreeMap::new(),
        }
    }

    /// Registry with `specific`, `brute` and `wolfe`.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("specific", |args| {
            no_args("specific", args)?;
            Ok(Arc::new(SpecificOracle))
        });
        reg.register("brute", |args| {
            no_args("brute", args)?;
            Ok(Arc::new(BruteForceOracle))
        });
        reg.register("wolfe", |args| Ok(Arc::new(WolfeOracle::from_args(args)?)));
        reg
    }

    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn(&[&str]) -> Result<Arc<dyn Level0Oracle>> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &str) -> Result<Arc<dyn Level0Oracle>> {
        let mut parts = spec.split(':');
        let name = parts.next().unwrap_or_default().trim();
        let args: Vec<&str> = parts.map(str::trim).collect();
        let factory = self.factories.get(name).ok_or_else(|| {
            DsfmError::Input(format!(
                "unknown level-0 oracle '{name}' (known: {})",
                self.names().join(", ")
            ))
        })?;
        factory(&args)
    }
}

impl Default for OracleRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

fn no_args(name: &str, args: &[&str]) -> Result<()> {
    if args.is_empty() {
        Ok(())
    } else {
        Err(DsfmError::Input(format!(
            "oracle '{name}' takes no arguments"
        )))
    }
}

/// Which oracle spec to use for each potential kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OraclePolicy {
    per_kind: BTreeMap<PotentialKind, String>,
}

impl Default for OraclePolicy {
    /// Specific oracles where they exist, brute force for tables, converged
    /// Wolfe for custom functions.
    fn default() -> Self {
        let mut per_kind = BTreeMap::new();
        for kind in PotentialKind::ALL {
            let spec = match kind {
                PotentialKind::Table => "brute",
                PotentialKind::Custom => "wolfe",
                _ => "specific",
            };
            per_kind.insert(kind, spec.to_string());
        }
        OraclePolicy { per_kind }
    }
}

impl OraclePolicy {
    /// Every kind served by the same oracle spec.
    pub fn uniform(spec: &str) -> Self {
        OraclePolicy {
            per_kind: PotentialKind::ALL
                .iter()
                .map(|&k| (k, spec.to_string()))
                .collect(),
        }
    }

    pub fn with(mut self, kind: PotentialKind, spec: &str) -> Self {
        self.per_kind.insert(kind, spec.to_string());
        self
    }

    pub fn spec_for(&self, kind: PotentialKind) -> &str {
        self.per_kind.get(&kind).map_or("specific", String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (PotentialKind, &str)> {
        self.per_kind.iter().map(|(k, v)| (*k, v.as_str()))
    }

    /// Applies an override of the form `kind=spec`; `all=spec` sets every kind.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (kind, spec) = assignment
            .split_once('=')
            .ok_or_else(|| DsfmError::Input(format!("expected kind=oracle, got '{assignment}'")))?;
        let (kind, spec) = (kind.trim(), spec.trim());
        if kind == "all" {
            *self = OraclePolicy::uniform(spec);
            return Ok(());
        }
        let kind = PotentialKind::parse(kind)
            .ok_or_else(|| DsfmError::Input(format!("unknown potential kind '{kind}'")))?;
        self.per_kind.insert(kind, spec.to_string());
        Ok(())
    }

    pub fn build(
        &self,
        registry: &OracleRegistry,
        inst: &DecomposableInstance,
    ) -> Result<OracleTable> {
        let mut cache: BTreeMap<PotentialKind, Arc<dyn Level0Oracle>> = BTreeMap::new();
        let mut per_block = Vec::with_capacity(inst.r());
        for p in inst.potentials() {
            let kind = p.kind();
            let oracle = match cache.get(&kind) {
                Some(o) => o.clone(),
                None => {
                    let o = registry.build(self.spec_for(kind))?;
                    cache.insert(kind, o.clone());
                    o
                }
            };
            per_block.push(oracle);
        }
        Ok(OracleTable { per_block })
    }
}

/// One oracle per block of an instance.
#[derive(Debug, Clone)]
pub struct OracleTable {
    per_block: Vec<Arc<dyn Level0Oracle>>,
}

impl OracleTable {
    pub fn new(per_block: Vec<Arc<dyn Level0Oracle>>) -> Self {
        OracleTable { per_block }
    }

    /// Same oracle for every block.
    pub fn uniform(oracle: Arc<dyn Level0Oracle>, r: usize) -> Self {
        OracleTable {
            per_block: vec![oracle; r],
        }
    }

    /// Default policy with the builtin registry.
    pub fn standard(inst: &DecomposableInstance) -> Result<Self> {
        OraclePolicy::default().build(&OracleRegistry::builtin(), inst)
    }

    pub fn get(&self, i: usize) -> &dyn Level0Oracle {
        self.per_block[i].as_ref()
    }

    pub fn len(&self) -> usize {
        self.per_block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_block.is_empty()
    }

    pub fn all_exact(&self) -> bool {
        self.per_block.iter().all(|o| o.is_exact())
    }

    /// Names of the inexact oracles in use (deduplicated).
    pub fn inexact_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .per_block
            .iter()
            .filter(|o| !o.is_exact())
            .map(|o| o.name())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}
