//! Wolfe's minimum-norm-point algorithm over a polytope given by a linear
//! minimization oracle.
//!
//! The polytope is shifted by a fixed vector `w`: we minimize `||y + w||²`
//! over `y` in the polytope. Atoms are stored unshifted so the returned point
//! is an exact convex combination of polytope points.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Returns the polytope point minimizing `<direction, p>`.
pub trait LinearMinimizer {
    fn dim(&self) -> usize;
    fn argmin(&self, direction: &[f64]) -> Vec<f64>;
}

/// Explicit finite point set; ties go to the first listed point.
pub struct PointSet<'a> {
    pub points: &'a [Vec<f64>],
}

impl LinearMinimizer for PointSet<'_> {
    fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    fn argmin(&self, direction: &[f64]) -> Vec<f64> {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (k, p) in self.points.iter().enumerate() {
            let v = dot(p, direction);
            if v < best_val {
                best_val = v;
                best = k;
            }
        }
        self.points[best].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WolfeParams {
    /// Stop once the Wolfe gap `<x, x> - <x, q>` drops to this value.
    pub eps: f64,
    /// Cap on major cycles (vertex insertions). `None` = run to convergence.
    pub max_major: Option<usize>,
    /// Cap on minor cycles (line searches towards the affine minimizer).
    pub max_minor: Option<usize>,
}

impl Default for WolfeParams {
    fn default() -> Self {
        WolfeParams {
            eps: 1e-10,
            max_major: None,
            max_minor: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WolfeStats {
    pub major_cycles: usize,
    pub minor_cycles: usize,
    /// Number of linear-minimization calls (gradient checks).
    pub lmo_calls: usize,
    pub gap: f64,
    pub converged: bool,
    /// Affine subproblems that were singular and forced an atom drop.
    pub degeneracies: usize,
    /// `||x||²` after each major cycle, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub active_set_size: usize,
}

#[derive(Debug, Clone)]
pub struct MinNormResult {
    /// Minimizer of `||y + w||²` (unshifted).
    pub point: Vec<f64>,
    pub stats: WolfeStats,
}

// Hard safety net against cycling when no explicit cap is given.
const MAJOR_SAFETY_CAP: usize = 100_000;

pub fn wolfe_min_norm(
    lmo: &dyn LinearMinimizer,
    shift: &[f64],
    initial: Vec<f64>,
    params: &WolfeParams,
) -> MinNormResult {
    let d = shift.len();
    debug_assert_eq!(lmo.dim(), d);
    let shifted = |p: &[f64]| -> Vec<f64> { p.iter().zip(shift).map(|(a, b)| a + b).collect() };

    let mut atoms: Vec<Vec<f64>> = vec![initial];
    let mut points: Vec<Vec<f64>> = vec![shifted(&atoms[0])];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = points[0].clone();
    let mut stats = WolfeStats {
        objective_trace: vec![dot(&x, &x)],
        ..Default::default()
    };
    let major_cap = params.max_major.unwrap_or(MAJOR_SAFETY_CAP);

    loop {
        let q = lmo.argmin(&x);
        stats.lmo_calls += 1;
        let qs = shifted(&q);
        let xx = dot(&x, &x);
        let gap = xx - dot(&x, &qs);
        stats.gap = gap.max(0.0);
        if gap <= params.eps {
            stats.converged = true;
            break;
        }
        if stats.major_cycles >= major_cap {
            break;
        }
        let scale = 1.0 + xx;
        if points.iter().any(|p| dist2(p, &qs) <= 1e-24 * scale) {
            // Numerical stall: the best vertex is already active.
            stats.converged = gap <= 1e-9 * scale;
            break;
        }
        atoms.push(q);
        points.push(qs);
        lambda.push(0.0);
        stats.major_cycles += 1;

        let mut minor_capped = false;
        loop {
            let alpha = match affine_minimizer(&points) {
                Some(a) => a,
                None => {
                    stats.degeneracies += 1;
                    atoms.pop();
                    points.pop();
                    lambda.pop();
                    break;
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lambda = alpha;
                break;
            }
            if params
                .max_minor
                .is_some_and(|cap| stats.minor_cycles >= cap)
            {
                minor_capped = true;
                break;
            }
            stats.minor_cycles += 1;
            let mut theta = f64::INFINITY;
            for (&l, &a) in lambda.iter().zip(&alpha) {
                if a <= 1e-14 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            if !theta.is_finite() {
                theta = 0.0;
            }
            let theta = theta.clamp(0.0, 1.0);
            for (l, &a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            // Drop at least the atom that hit zero.
            let min_idx = argmin_f64(&lambda);
            let flags: Vec<bool> = lambda
                .iter()
                .enumerate()
                .map(|(k, &l)| k != min_idx && l > 1e-15)
                .collect();
            retain_by(&mut atoms, &flags);
            retain_by(&mut points, &flags);
            retain_by(&mut lambda, &flags);
            normalize(&mut lambda);
            if atoms.len() == 1 {
                lambda = vec![1.0];
                break;
            }
        }
        let next = combine(&points, &lambda);
        let moved = dist2(&next, &x);
        x = next;
        let now = dot(&x, &x);
        stats.objective_trace.push(now);
        if moved <= 1e-30 * scale || now > xx * (1.0 + 1e-12) {
            // Each major cycle moves x and decreases ||x||² in exact arithmetic.
            stats.converged = gap <= 1e-9 * scale;
            break;
        }
        if minor_capped {
            let q = lmo.argmin(&x);
            stats.lmo_calls += 1;
            stats.gap = (dot(&x, &x) - dot(&x, &shifted(&q))).max(0.0);
            stats.converged = stats.gap <= params.eps;
            break;
        }
    }
    stats.active_set_size = atoms.len();
    MinNormResult {
        point: combine(&atoms, &lambda),
        stats,
    }
}

/// Affine minimizer of `||Σ α_j p_j||²` subject to `Σ α_j = 1`.
fn affine_minimizer(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = points.len();
    if m == 1 {
        return Some(vec![1.0]);
    }
    let d = points[0].len();
    if m - 1 > d {
        return None;
    }
    // Least squares on differences: min ||p0 + Σ μ_i (p_i - p0)||, by QR.
    let diffs = DMatrix::<f64>::from_fn(d, m - 1, |row, col| points[col + 1][row] - points[0][row]);
    let p0 = DVector::<f64>::from_column_slice(&points[0]);
    let qr = diffs.qr();
    let r = qr.r();
    let largest = r.diagonal().amax();
    if largest.is_nan() || largest <= 0.0 || r.diagonal().iter().any(|v| v.abs() <= 1e-12 * largest)
    {
        return None;
    }
    let rhs = -(qr.q().transpose() * p0);
    let mu = r.solve_upper_triangular(&rhs)?;
    if mu.iter().any(|a| !a.is_finite()) {
        return None;
    }
    let mut alpha = Vec::with_capacity(m);
    alpha.push(1.0 - mu.sum());
    alpha.extend(mu.iter().copied());
    Some(alpha)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn combine(points: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    let d = points[0].len();
    let mut out = vec![0.0; d];
    for (p, &l) in points.iter().zip(lambda) {
        for (o, &v) in out.iter_mut().zip(p) {
            *o += l * v;
        }
    }
    out
}

fn normalize(lambda: &mut [f64]) {
    let s: f64 = lambda.iter().sum();
    if s > 0.0 {
        lambda.iter_mut().for_each(|l| *l /= s);
    }
}

fn argmin_f64(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = k;
        }
    }
    best
}

fn retain_by<T>(v: &mut Vec<T>, flags: &[bool]) {
    let mut it = flags.iter();
    v.retain(|_| *it.next().unwrap());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![
            vec![1.0, 1.0],
            vec![1.0, 3.0],
            vec![3.0, 1.0],
            vec![3.0, 3.0],
        ]
    }

    #[test]
    fn nearest_vertex_of_square() {
        let pts = square();
        let res = wolfe_min_norm(
            &PointSet { points: &pts },
            &[0.0, 0.0],
            pts[3].clone(),
            &WolfeParams::default(),
        );
        assert!(res.stats.converged);
        assert!((res.point[0] - 1.0).abs() < 1e-9 && (res.point[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projection_onto_edge_interior() {
        // Segment from (-1, 1) to (1, 1): min-norm point is (0, 1).
        let pts = vec![vec![-1.0, 1.0], vec![1.0, 1.0]];
        let res = wolfe_min_norm(
            &PointSet { points: &pts },
            &[0.0, 0.0],
            pts[0].clone(),
            &WolfeParams::default(),
        );
        assert!(res.point[0].abs() < 1e-12);
        assert!((res.point[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn objective_trace_non_increasing() {
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.5;
                vec![2.0 + t.cos(), 1.5 + t.sin(), 0.3 * t]
            })
            .collect();
        let res = wolfe_min_norm(
            &PointSet { points: &pts },
            &[0.1, -0.2, -1.0],
            pts[5].clone(),
            &WolfeParams::default(),
        );
        for pair in res.stats.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12);
        }
    }

    #[test]
    fn major_cap_is_respected() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.157;
                vec![t.cos(), t.sin(), 1.0]
            })
            .collect();
        let params = WolfeParams {
            max_major: Some(1),
            ..Default::default()
        };
        let res = wolfe_min_norm(
            &PointSet { points: &pts },
            &[0.0; 3],
            pts[0].clone(),
            &params,
        );
        assert!(res.stats.major_cycles <= 1);
    }
}
