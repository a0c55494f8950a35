use crate::error::{DsfmError, Result};
use crate::set_function::{PotentialKind, SetFunction};

/// Cut function of a single weighted edge: `a` if exactly one endpoint is in `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCutPotential {
    ids: [usize; 2],
    weight: f64,
}

impl EdgeCutPotential {
    pub fn new(u: usize, v: usize, weight: f64) -> Result<Self> {
        if u == v {
            return Err(DsfmError::Input(format!("edge endpoints coincide ({u})")));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(DsfmError::Input(format!(
                "edge weight must be >= 0, got {weight}"
            )));
        }
        Ok(EdgeCutPotential {
            ids: [u, v],
            weight,
        })
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.ids[0], self.ids[1])
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

impl SetFunction for EdgeCutPotential {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::EdgeCut
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        if members[0] != members[1] {
            self.weight
        } else {
            0.0
        }
    }

    // B(f) = {(t, -t) : |t| <= a}; minimize (t + w_u)² + (w_v - t)².
    fn specialized_min_norm(&self, w: &[f64]) -> Option<Vec<f64>> {
        let t = (0.5 * (w[1] - w[0])).clamp(-self.weight, self.weight);
        Some(vec![t, -t])
    }
}
