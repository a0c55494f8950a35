use super::{Level0Oracle, QuadSolution};
use crate::base::BaseLmo;
use crate::error::{DsfmError, Result};
use crate::minnorm::{wolfe_min_norm, LinearMinimizer, MinNormResult, WolfeParams};
use crate::set_function::SetFunction;

/// Arguments for one Fujishige–Wolfe call on a single potential.
#[derive(Debug, Clone, Default)]
pub struct OracleRequest<'a> {
    /// Shift `w` in local coordinates.
    pub shift: &'a [f64],
    pub params: WolfeParams,
    /// Starting point in `B(f)`; must be a vertex or convex combination of vertices.
    pub warm_start: Option<&'a [f64]>,
}

/// Min-norm point of `B(f) + w` by Wolfe's algorithm with greedy vertices.
pub fn fujishige_wolfe(f: &dyn SetFunction, req: &OracleRequest<'_>) -> Result<MinNormResult> {
    let k = f.support_len();
    if req.shift.len() != k {
        return Err(DsfmError::Input("shift length differs from support".into()));
    }
    if req.shift.iter().any(|v| !v.is_finite()) {
        return Err(DsfmError::Input("shift must be finite".into()));
    }
    let lmo = BaseLmo(f);
    let initial = match req.warm_start {
        Some(x) if x.len() == k => x.to_vec(),
        Some(_) => {
            return Err(DsfmError::Input(
                "warm start length differs from support".into(),
            ))
        }
        None => lmo.argmin(req.shift),
    };
    Ok(wolfe_min_norm(&lmo, req.shift, initial, &req.params))
}

/// Generic oracle for any submodular function.
///
/// With a major-cycle cap it becomes the inexact oracle used in experiments;
/// `warm_start` then reuses the caller's previous block as the initial atom.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WolfeOracle {
    pub params: WolfeParams,
    pub warm_start: bool,
}

impl WolfeOracle {
    pub fn capped(max_major: usize, warm_start: bool) -> Self {
        WolfeOracle {
            params: WolfeParams {
                max_major: Some(max_major),
                ..WolfeParams::default()
            },
            warm_start,
        }
    }

    /// Parses `[<max_major>][:warm|:cold]`.
    pub fn from_args(args: &[&str]) -> Result<Self> {
        let mut oracle = WolfeOracle::default();
        for (pos, arg) in args.iter().enumerate() {
            match *arg {
                "warm" => oracle.warm_start = true,
                "cold" => oracle.warm_start = false,
                "" | "inf" if pos == 0 => {}
                s if pos == 0 => {
                    let cap: usize = s
                        .parse()
                        .map_err(|_| DsfmError::Input(format!("bad wolfe cycle cap '{s}'")))?;
                    if cap == 0 {
                        return Err(DsfmError::Input("wolfe cycle cap must be positive".into()));
                    }
                    oracle.params.max_major = Some(cap);
                }
                s => return Err(DsfmError::Input(format!("bad wolfe option '{s}'"))),
            }
        }
        Ok(oracle)
    }
}

impl Level0Oracle for WolfeOracle {
    fn name(&self) -> String {
        let mut s = String::from("wolfe");
        if let Some(cap) = self.params.max_major {
            s.push_str(&format!(":{cap}"));
        }
        if self.warm_start {
            s.push_str(if self.params.max_major.is_some() {
                ":warm"
            } else {
                ":inf:warm"
            });
        }
        s
    }

    fn is_exact(&self) -> bool {
        self.params.max_major.is_none() && self.params.max_minor.is_none()
    }

    fn quadratic(
        &self,
        f: &dyn SetFunction,
        w: &[f64],
        warm: Option<&[f64]>,
    ) -> Result<QuadSolution> {
        let req = OracleRequest {
            shift: w,
            params: self.params,
            warm_start: if self.warm_start { warm } else { None },
        };
        let res = fujishige_wolfe(f, &req)?;
        Ok(QuadSolution {
            point: res.point,
            exact: self.is_exact() && res.stats.converged,
            wolfe: Some(res.stats),
        })
    }
}
