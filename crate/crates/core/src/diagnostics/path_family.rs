use std::sync::Arc;

use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::potentials::Potential;
use crate::set_function::{PotentialKind, SetFunction};

/// Cut function of every other edge of the path `0 - 1 - .. - (n-1)`.
///
/// Edge `e` joins `e - 1` and `e` (`1 ≤ e < n`); the potential with parity
/// `p` holds the edges with `e % 2 == p`. The edges are disjoint, so `B(f)` is
/// a product of segments and the min-norm problem splits per edge.
#[derive(Debug, Clone)]
pub struct AlternatingPathCut {
    ids: Vec<usize>,
    weight: f64,
}

impl AlternatingPathCut {
    pub fn new(n: usize, parity: usize, weight: f64) -> Result<Self> {
        if !weight.is_finite() || weight < 0.0 {
            return Err(DsfmError::Input(format!(
                "edge weight must be >= 0, got {weight}"
            )));
        }
        let ids: Vec<usize> = (1..n)
            .filter(|e| e % 2 == parity % 2)
            .flat_map(|e| [e - 1, e])
            .collect();
        if ids.is_empty() {
            return Err(DsfmError::Input(format!(
                "path on {n} nodes has no edge of parity {parity}"
            )));
        }
        Ok(AlternatingPathCut { ids, weight })
    }
}

impl SetFunction for AlternatingPathCut {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Custom
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        members.chunks(2).filter(|m| m[0] != m[1]).count() as f64 * self.weight
    }

    fn specialized_min_norm(&self, w: &[f64]) -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(w.len());
        for pair in w.chunks(2) {
            let t = (0.5 * (pair[1] - pair[0])).clamp(-self.weight, self.weight);
            out.extend([t, -t]);
        }
        Some(out)
    }
}

/// Path cut on `n ≥ 3` nodes split into its even and odd edges.
pub fn alternating_path_instance(n: usize, weight: f64) -> Result<DecomposableInstance> {
    if n < 3 {
        return Err(DsfmError::Input("path family needs n >= 3".into()));
    }
    let pots: Vec<Potential> = (0..2)
        .map(|p| AlternatingPathCut::new(n, p, weight).map(|f| Potential::Custom(Arc::new(f))))
        .collect::<Result<_>>()?;
    DecomposableInstance::new(n, pots)
}

/// Point carrying `t_e = min(e, n - e)` on edge `e`, as `(t_e, -t_e)` on its
/// endpoints. Feasible when the edge weight is at least `n/2`.
pub fn tent_point(inst: &DecomposableInstance) -> Result<BlockVector> {
    let n = inst.n();
    let blocks = inst
        .potentials()
        .iter()
        .map(|p| {
            p.support()
                .chunks(2)
                .flat_map(|pair| {
                    let e = pair[1];
                    let t = e.min(n - e) as f64;
                    [t, -t]
                })
                .collect()
        })
        .collect();
    inst.block_vector(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::check_base_membership;

    #[test]
    fn blocks_partition_edges() {
        let inst = alternating_path_instance(5, 3.0).unwrap();
        assert_eq!(inst.potential(0).support(), &[1, 2, 3, 4]);
        assert_eq!(inst.potential(1).support(), &[0, 1, 2, 3]);
        assert_eq!(inst.evaluate(&[0, 1]).unwrap(), 3.0);
        assert_eq!(inst.evaluate(&[1, 3]).unwrap(), 12.0);
    }

    #[test]
    fn tent_is_feasible() {
        let inst = alternating_path_instance(7, 3.5).unwrap();
        let y = tent_point(&inst).unwrap();
        for (p, b) in inst.potentials().iter().zip(y.blocks()) {
            assert!(check_base_membership(p, b, 1e-9).unwrap());
        }
        assert_eq!(y.aggregate(), &[1.0, 1.0, 1.0, 0.0, -1.0, -1.0, -1.0]);
    }
}
