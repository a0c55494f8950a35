use crate::base::{enumerate_vertices, BaseLmo};
use crate::error::{DsfmError, Result};
use crate::minnorm::{wolfe_min_norm, LinearMinimizer, PointSet, WolfeParams};
use crate::set_function::{PotentialKind, SetFunction};

/// `scale · sqrt(#cut edges)` on the 4-cycle of a 2×2 pixel square.
///
/// The ids are stored in cycle order (top-left, top-right, bottom-right,
/// bottom-left) so that consecutive entries are adjacent.
#[derive(Debug, Clone, PartialEq)]
pub struct SquarePotential {
    ids: [usize; 4],
    scale: f64,
    vertices: Vec<Vec<f64>>,
}

impl SquarePotential {
    pub fn new(cycle: [usize; 4], scale: f64) -> Result<Self> {
        let mut sorted = cycle;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(DsfmError::Input("square ids must be distinct".into()));
        }
        if !scale.is_finite() || scale < 0.0 {
            return Err(DsfmError::Input(format!(
                "square scale must be >= 0, got {scale}"
            )));
        }
        let mut sq = SquarePotential {
            ids: cycle,
            scale,
            vertices: Vec::new(),
        };
        sq.vertices = enumerate_vertices(&sq)?;
        Ok(sq)
    }

    pub fn cycle(&self) -> [usize; 4] {
        self.ids
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl SetFunction for SquarePotential {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Square
    }

    fn eval_local(&self, m: &[bool]) -> f64 {
        let cut = (0..4).filter(|&k| m[k] != m[(k + 1) % 4]).count();
        self.scale * (cut as f64).sqrt()
    }

    // Wolfe over the explicit vertex list is finite and exact here.
    fn specialized_min_norm(&self, w: &[f64]) -> Option<Vec<f64>> {
        let lmo = PointSet {
            points: &self.vertices,
        };
        let start = BaseLmo(self).argmin(w);
        let w2: f64 = w.iter().map(|v| v * v).sum();
        let params = WolfeParams {
            eps: 1e-14 * (1.0 + self.scale * self.scale + w2),
            ..Default::default()
        };
        Some(wolfe_min_norm(&lmo, w, start, &params).point)
    }
}
