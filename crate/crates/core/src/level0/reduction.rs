use super::SfmSolution;
use crate::error::{DsfmError, Result};
use crate::set_function::{Minor, SetFunction};

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    /// Min-norm point of `B(f)` shifted by `w`, in local coordinates.
    pub point: Vec<f64>,
    /// Number of minimization oracle calls (at most `2|C|`).
    pub sfm_calls: usize,
}

/// Minimization oracle used by the reduction: `(f, w) ↦ argmin f(S) + w(S)`.
pub type SfmFn<'a> = dyn Fn(&dyn SetFunction, &[f64]) -> Result<SfmSolution> + 'a;

/// Quadratic oracle built from a minimization oracle by divide and conquer.
///
/// Works on `g = f + w`. For a piece `T` with pivot `α = g(T)/|T|`, one call
/// minimizes `g - α` over the minor on `T`; a strictly negative minimizer `A`
/// splits `T` into `A` and the contraction `T \ A`, otherwise the min-norm
/// point is constant `α` on `T`.
pub fn quad_oracle_from_sfm(
    f: &dyn SetFunction,
    w: &[f64],
    sfm: &SfmFn<'_>,
) -> Result<ReductionOutput> {
    let k = f.support_len();
    if w.len() != k {
        return Err(DsfmError::Input(
            "weight length differs from support".into(),
        ));
    }
    let mut shifted = vec![0.0; k];
    let mut calls = 0;
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![((0..k).collect(), Vec::new())];
    while let Some((keep, contracted)) = stack.pop() {
        let minor = Minor::new(f, keep.clone(), &contracted);
        let g_t = minor.full_value() + keep.iter().map(|&j| w[j]).sum::<f64>();
        let alpha = g_t / keep.len() as f64;
        if keep.len() == 1 {
            shifted[keep[0]] = g_t;
            continue;
        }
        let w_minor: Vec<f64> = keep.iter().map(|&j| w[j] - alpha).collect();
        let sol = sfm(&minor, &w_minor)?;
        calls += 1;
        let scale: f64 = 1.0 + w_minor.iter().map(|v| v.abs()).sum::<f64>() + g_t.abs();
        let tol = 1e-10 * scale;
        let recomputed = minor.eval_local(&sol.members)
            + sol
                .members
                .iter()
                .zip(&w_minor)
                .filter(|(&m, _)| m)
                .map(|(_, v)| v)
                .sum::<f64>();
        if (recomputed - sol.value).abs() > tol || sol.value > tol {
            return Err(DsfmError::OracleExactness(format!(
                "minimization oracle reported {} but its set has value {recomputed}",
                sol.value
            )));
        }
        let inside: Vec<usize> = keep
            .iter()
            .zip(&sol.members)
            .filter(|(_, &m)| m)
            .map(|(&j, _)| j)
            .collect();
        if sol.value >= -tol || inside.is_empty() || inside.len() == keep.len() {
            for &j in &keep {
                shifted[j] = alpha;
            }
            continue;
        }
        let outside: Vec<usize> = keep
            .iter()
            .zip(&sol.members)
            .filter(|(_, &m)| !m)
            .map(|(&j, _)| j)
            .collect();
        let mut grown = contracted.clone();
        grown.extend(&inside);
        stack.push((outside, grown));
        stack.push((inside, contracted));
    }
    let point = shifted.iter().zip(w).map(|(s, wv)| s - wv).collect();
    Ok(ReductionOutput {
        point,
        sfm_calls: calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::check_base_membership;
    use crate::level0::brute_force_sfm;
    use crate::potentials::{EdgeCutPotential, RegionPotential};

    #[test]
    fn edge_matches_closed_form() {
        let e = EdgeCutPotential::new(0, 1, 1.0).unwrap();
        for w in [[0.0, 0.0], [-2.0, 0.0], [0.5, -0.25], [3.0, -3.0]] {
            let out = quad_oracle_from_sfm(&e, &w, &brute_force_sfm).unwrap();
            let closed = e.specialized_min_norm(&w).unwrap();
            for (a, b) in out.point.iter().zip(&closed) {
                assert!((a - b).abs() < 1e-9, "{w:?}: {:?} vs {closed:?}", out.point);
            }
            assert!(out.sfm_calls <= 4);
        }
    }

    #[test]
    fn region_matches_closed_form() {
        let r = RegionPotential::new(vec![3, 1, 4, 0, 2]).unwrap();
        let w = [0.3, -1.7, 2.2, 0.0, -0.4];
        let out = quad_oracle_from_sfm(&r, &w, &brute_force_sfm).unwrap();
        let closed = r.specialized_min_norm(&w).unwrap();
        for (a, b) in out.point.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(check_base_membership(&r, &out.point, 1e-8).unwrap());
        assert!(out.sfm_calls <= 10);
    }

    #[test]
    fn lying_oracle_detected() {
        let r = RegionPotential::new(vec![0, 1, 2]).unwrap();
        let liar = |_: &dyn SetFunction, w: &[f64]| {
            Ok(SfmSolution {
                members: vec![true; w.len()],
                value: -100.0,
                exact: true,
            })
        };
        assert!(matches!(
            quad_oracle_from_sfm(&r, &[1.0, -1.0, 0.0], &liar),
            Err(DsfmError::OracleExactness(_))
        ));
    }
}
