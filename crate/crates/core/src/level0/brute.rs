use super::{quad_oracle_from_sfm, Level0Oracle, QuadSolution, SfmSolution};
use crate::error::{DsfmError, Result};
use crate::set_function::{eval_mask, mask_to_members, SetFunction};

pub const MAX_BRUTE_SUPPORT: usize = 24;

/// Exhaustive `argmin_{S ⊆ C} f(S) + w(S)` over all `2^|C|` subsets.
///
/// Ties go to the smallest bitmask (bit `j` ↔ local index `j`).
pub fn brute_force_sfm(f: &dyn SetFunction, w: &[f64]) -> Result<SfmSolution> {
    let k = f.support_len();
    if k > MAX_BRUTE_SUPPORT {
        return Err(DsfmError::Capability(format!(
            "brute-force minimization needs |C| <= {MAX_BRUTE_SUPPORT}, got {k}"
        )));
    }
    if w.len() != k {
        return Err(DsfmError::Input(
            "weight length differs from support".into(),
        ));
    }
    let mut scratch = vec![false; k];
    let mut best_mask = 0u64;
    let mut best = 0.0;
    for mask in 1..1u64 << k {
        let ws: f64 = (0..k).filter(|&j| mask >> j & 1 == 1).map(|j| w[j]).sum();
        let v = eval_mask(f, mask, &mut scratch) + ws;
        if v < best {
            best = v;
            best_mask = mask;
        }
    }
    Ok(SfmSolution {
        members: mask_to_members(best_mask, k),
        value: best,
        exact: true,
    })
}

/// `F_max = max_S |f(S)|`; bounds every coordinate of every greedy vertex by `2 F_max`.
pub fn max_abs_value(f: &dyn SetFunction) -> Result<f64> {
    let k = f.support_len();
    if k > MAX_BRUTE_SUPPORT {
        return Err(DsfmError::Capability(format!(
            "F_max enumeration needs |C| <= {MAX_BRUTE_SUPPORT}, got {k}"
        )));
    }
    let mut scratch = vec![false; k];
    Ok((0..1u64 << k)
        .map(|m| eval_mask(f, m, &mut scratch).abs())
        .fold(0.0, f64::max))
}

/// Exhaustive search; its quadratic answers come from the divide-and-conquer
/// reduction to minimization.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForceOracle;

impl Level0Oracle for BruteForceOracle {
    fn name(&self) -> String {
        "brute".into()
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
        let out = quad_oracle_from_sfm(f, w, &brute_force_sfm)?;
        Ok(QuadSolution {
            point: out.point,
            exact: true,
            wolfe: None,
        })
    }

    fn sfm(&self, f: &dyn SetFunction, w: &[f64]) -> Result<SfmSolution> {
        brute_force_sfm(f, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{EdgeCutPotential, RegionPotential};

    #[test]
    fn zero_weights_pick_empty_set() {
        let r = RegionPotential::new(vec![0, 1, 2]).unwrap();
        let s = brute_force_sfm(&r, &[0.0; 3]).unwrap();
        assert_eq!(s.members, vec![false; 3]);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn edge_cut_with_pull_on_one_end() {
        // {u}: 1 - 2 = -1; {u, v}: 0 - 2 = -2 is the true minimum.
        let e = EdgeCutPotential::new(0, 1, 1.0).unwrap();
        let s = brute_force_sfm(&e, &[-2.0, 0.0]).unwrap();
        assert_eq!(s.members, vec![true, true]);
        assert_eq!(s.value, -2.0);
    }

    #[test]
    fn region_of_four() {
        // Enumerating all 16 subsets: the full set has 0 - 6 = -6.
        let r = RegionPotential::new(vec![0, 1, 2, 3]).unwrap();
        let s = brute_force_sfm(&r, &[-3.0, -3.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.members, vec![true; 4]);
        assert_eq!(s.value, -6.0);
        // Pushing the other two away makes the pair {0, 1} win: 4 - 5 = -1.
        let s = brute_force_sfm(&r, &[-2.5, -2.5, 3.0, 3.0]).unwrap();
        assert_eq!(s.members, vec![true, true, false, false]);
        assert_eq!(s.value, -1.0);
    }

    #[test]
    fn too_large_support_rejected() {
        let r = RegionPotential::new((0..25).collect()).unwrap();
        assert!(matches!(
            brute_force_sfm(&r, &[0.0; 25]),
            Err(DsfmError::Capability(_))
        ));
    }

    #[test]
    fn f_max_of_region() {
        let r = RegionPotential::new((0..5).collect()).unwrap();
        assert_eq!(max_abs_value(&r).unwrap(), 6.0);
    }
}
