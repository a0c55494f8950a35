use crate::error::{DsfmError, Result};
use crate::set_function::{PotentialKind, SetFunction};

/// Count-based region potential `f(S) = |S| · |C \ S|`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPotential {
    ids: Vec<usize>,
}

impl RegionPotential {
    pub fn new(ids: Vec<usize>) -> Result<Self> {
        if ids.is_empty() {
            return Err(DsfmError::Input("region must be non-empty".into()));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(DsfmError::Input("region lists an element twice".into()));
        }
        Ok(RegionPotential { ids })
    }

    fn g(&self, k: usize) -> f64 {
        (k * (self.ids.len() - k)) as f64
    }
}

impl SetFunction for RegionPotential {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Region
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        self.g(members.iter().filter(|&&m| m).count())
    }

    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        (0..=order.len()).map(|k| self.g(k)).collect()
    }

    // Sort the target t = -w decreasingly; the minimizer is
    // y = t - iso(t - d) with d_k = g(k) - g(k-1) and iso the decreasing
    // isotonic regression.
    fn specialized_min_norm(&self, w: &[f64]) -> Option<Vec<f64>> {
        let k = self.ids.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(self.ids[a].cmp(&self.ids[b])));
        let residual: Vec<f64> = order
            .iter()
            .enumerate()
            .map(|(pos, &j)| -w[j] - (self.g(pos + 1) - self.g(pos)))
            .collect();
        let iso = decreasing_isotonic(&residual);
        let mut y = vec![0.0; k];
        for (pos, &j) in order.iter().enumerate() {
            y[j] = -w[j] - iso[pos];
        }
        Some(y)
    }
}

/// Least-squares fit by a non-increasing sequence (pool adjacent violators).
pub fn decreasing_isotonic(values: &[f64]) -> Vec<f64> {
    // (sum, count) per pooled block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 >= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            let last = blocks.len() - 1;
            blocks[last] = (s0 + s1, c0 + c1);
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, c) in blocks {
        out.extend(std::iter::repeat_n(s / c as f64, c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        let r = RegionPotential::new(vec![0, 1, 2, 3]).unwrap();
        assert_eq!(r.eval_local(&[true, false, false, false]), 3.0);
        assert_eq!(r.eval_local(&[true, true, false, false]), 4.0);
        assert_eq!(r.full_value(), 0.0);
    }

    #[test]
    fn zero_shift_gives_zero() {
        let r = RegionPotential::new(vec![0, 1, 2]).unwrap();
        let y = r.specialized_min_norm(&[0.0; 3]).unwrap();
        assert!(y.iter().all(|v| v.abs() < 1e-12), "{y:?}");
    }

    #[test]
    fn pair_reduces_to_edge() {
        let r = RegionPotential::new(vec![0, 1]).unwrap();
        assert_eq!(r.specialized_min_norm(&[-5.0, 5.0]), Some(vec![1.0, -1.0]));
    }

    #[test]
    fn pav_pools_violators() {
        assert_eq!(decreasing_isotonic(&[3.0, 1.0, 2.0]), vec![3.0, 1.5, 1.5]);
        assert_eq!(decreasing_isotonic(&[1.0, 2.0, 3.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(decreasing_isotonic(&[]), Vec::<f64>::new());
    }

    #[test]
    fn rejects_duplicates() {
        assert!(RegionPotential::new(vec![1, 2, 1]).is_err());
        assert!(RegionPotential::new(vec![]).is_err());
    }
}
