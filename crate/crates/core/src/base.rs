//! Base polytope primitives: greedy vertices, membership, block vectors.

use serde::{Deserialize, Serialize};

use crate::error::{DsfmError, Result};
use crate::minnorm::LinearMinimizer;
use crate::set_function::{eval_mask, SetFunction, MAX_EXHAUSTIVE_CHECK};

/// Default tolerance for base-polytope equalities and inequalities.
pub const TAU_BASE: f64 = 1e-8;

/// A point of `B(f_i)` in local coordinates of the potential's support.
pub type BasePoint = Vec<f64>;

/// Local indices ordered by decreasing weight, ties by global id ascending.
pub fn greedy_order(f: &dyn SetFunction, w: &[f64]) -> Vec<usize> {
    let ids = f.support();
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(ids[a].cmp(&ids[b])));
    order
}

/// Edmonds' greedy vertex for a given permutation of local indices.
pub fn vertex_for_order(f: &dyn SetFunction, order: &[usize]) -> BasePoint {
    let chain = f.chain_values(order);
    let mut x = vec![0.0; f.support_len()];
    for (k, &j) in order.iter().enumerate() {
        x[j] = chain[k + 1] - chain[k];
    }
    x
}

/// Vertex of `B(f)` maximizing `<w, x>`.
pub fn greedy_vertex(f: &dyn SetFunction, w: &[f64]) -> Result<BasePoint> {
    if w.len() != f.support_len() {
        return Err(DsfmError::Input(format!(
            "weight vector has length {}, support has {}",
            w.len(),
            f.support_len()
        )));
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(DsfmError::Input("weight vector must be finite".into()));
    }
    Ok(vertex_for_order(f, &greedy_order(f, w)))
}

/// Linear minimization over `B(f)`, used by the Wolfe kernel.
pub struct BaseLmo<'a>(pub &'a dyn SetFunction);

impl LinearMinimizer for BaseLmo<'_> {
    fn dim(&self) -> usize {
        self.0.support_len()
    }

    fn argmin(&self, direction: &[f64]) -> Vec<f64> {
        let neg: Vec<f64> = direction.iter().map(|d| -d).collect();
        vertex_for_order(self.0, &greedy_order(self.0, &neg))
    }
}

/// Exhaustive membership test for `B(f)`.
pub fn check_base_membership(f: &dyn SetFunction, x: &[f64], tau: f64) -> Result<bool> {
    let k = f.support_len();
    if k > MAX_EXHAUSTIVE_CHECK {
        return Err(DsfmError::Capability(format!(
            "membership check needs |C| <= {MAX_EXHAUSTIVE_CHECK}, got {k}"
        )));
    }
    if x.len() != k {
        return Err(DsfmError::Input("point length differs from support".into()));
    }
    let mut scratch = vec![false; k];
    let full = (1u64 << k) - 1;
    for mask in 0..=full {
        let fv = eval_mask(f, mask, &mut scratch);
        let xs: f64 = (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| x[j]).sum();
        if mask == full {
            if (xs - fv).abs() > tau {
                return Ok(false);
            }
        } else if xs > fv + tau {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Distinct vertices of `B(f)` from all `|C|!` orderings (small supports only).
pub fn enumerate_vertices(f: &dyn SetFunction) -> Result<Vec<BasePoint>> {
    let k = f.support_len();
    if k > 8 {
        return Err(DsfmError::Capability(format!(
            "vertex enumeration needs |C| <= 8, got {k}"
        )));
    }
    let mut out: Vec<BasePoint> = Vec::new();
    let mut perm: Vec<usize> = (0..k).collect();
    permutations(&mut perm, 0, &mut |order| {
        let v = vertex_for_order(f, order);
        if !out
            .iter()
            .any(|u| u.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-12))
        {
            out.push(v);
        }
    });
    Ok(out)
}

fn permutations(perm: &mut Vec<usize>, start: usize, visit: &mut dyn FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permutations(perm, start + 1, visit);
        perm.swap(start, i);
    }
}

/// `y = (y_1, .., y_r)` with `y_i` in local coordinates of potential `i`, plus
/// the cached aggregate `Ay` over the ground set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockVector {
    blocks: Vec<Vec<f64>>,
    aggregate: Vec<f64>,
}

impl BlockVector {
    /// Builds from blocks; `supports[i]` gives the global ids of block `i`.
    pub fn from_blocks(n: usize, supports: &[&[usize]], blocks: Vec<Vec<f64>>) -> Result<Self> {
        if supports.len() != blocks.len() {
            return Err(DsfmError::Input(
                "block count differs from potential count".into(),
            ));
        }
        let mut aggregate = vec![0.0; n];
        for (ids, b) in supports.iter().zip(&blocks) {
            if ids.len() != b.len() {
                return Err(DsfmError::Input("block length differs from support".into()));
            }
            for (&v, &val) in ids.iter().zip(b) {
                if v >= n {
                    return Err(DsfmError::Input(format!("element {v} outside ground set")));
                }
                aggregate[v] += val;
            }
        }
        Ok(BlockVector { blocks, aggregate })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn aggregate(&self) -> &[f64] {
        &self.aggregate
    }

    /// Replaces block `i`, updating the aggregate incrementally.
    pub fn set_block(&mut self, i: usize, ids: &[usize], values: Vec<f64>) {
        debug_assert_eq!(values.len(), ids.len());
        for ((&v, old), new) in ids.iter().zip(&self.blocks[i]).zip(&values) {
            self.aggregate[v] += new - old;
        }
        self.blocks[i] = values;
    }

    /// `y_i(local) += delta`.
    pub fn add(&mut self, i: usize, ids: &[usize], local: usize, delta: f64) {
        self.blocks[i][local] += delta;
        self.aggregate[ids[local]] += delta;
    }

    /// Recomputes the aggregate from scratch (drops accumulated rounding).
    pub fn refresh_aggregate(&mut self, supports: &[&[usize]]) {
        self.aggregate.iter_mut().for_each(|a| *a = 0.0);
        for (ids, b) in supports.iter().zip(&self.blocks) {
            for (&v, &val) in ids.iter().zip(b) {
                self.aggregate[v] += val;
            }
        }
    }

    /// Euclidean distance over all block coordinates.
    pub fn distance(&self, other: &BlockVector) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
            .sum::<f64>()
            .sqrt()
    }

    pub fn half_squared_norm_of_aggregate(&self) -> f64 {
        0.5 * self.aggregate.iter().map(|a| a * a).sum::<f64>()
    }
}
