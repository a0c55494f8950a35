//! Structural checks on a loaded instance.

use dsfm_core::base::check_base_membership;
use dsfm_core::set_function::{check_submodular, MAX_EXHAUSTIVE_CHECK};
use dsfm_core::{DecomposableInstance, DsfmError, SetFunction};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub potential: usize,
    pub kind: String,
    pub message: String,
    pub x: Option<Vec<usize>>,
    pub y: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub r: usize,
    pub checked: usize,
    /// Potentials too large for exhaustive checking.
    pub skipped: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustive submodularity check and greedy-vertex membership check for
/// every potential with at most `MAX_EXHAUSTIVE_CHECK` elements.
pub fn validate_instance(inst: &DecomposableInstance) -> ValidationReport {
    let results: Vec<Option<Option<Violation>>> = inst
        .potentials()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if p.support_len() > MAX_EXHAUSTIVE_CHECK {
                return None;
            }
            let scale = 1.0 + p.full_value().abs();
            let violation = |message: String, x, y| Violation {
                potential: i,
                kind: p.kind().to_string(),
                message,
                x,
                y,
            };
            if let Err(e) = check_submodular(p, 1e-9 * scale) {
                let message = e.to_string();
                return Some(Some(match e {
                    DsfmError::NotSubmodular { x, y, .. } => violation(message, Some(x), Some(y)),
                    other => violation(other.to_string(), None, None),
                }));
            }
            let w: Vec<f64> = (0..p.support_len()).map(|j| j as f64).collect();
            let v = match dsfm_core::greedy_vertex(p, &w) {
                Ok(v) => v,
                Err(e) => return Some(Some(violation(e.to_string(), None, None))),
            };
            match check_base_membership(p, &v, 1e-8 * scale) {
                Ok(true) => Some(None),
                Ok(false) => Some(Some(violation(
                    "greedy vertex outside B(f)".into(),
                    None,
                    None,
                ))),
                Err(e) => Some(Some(violation(e.to_string(), None, None))),
            }
        })
        .collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    ValidationReport {
        n: inst.n(),
        r: inst.r(),
        checked: results.len() - skipped,
        skipped,
        violations: results.into_iter().flatten().flatten().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsfm_core::potentials::{EdgeCutPotential, RegionPotential, TablePotential};
    use dsfm_core::Potential;

    #[test]
    fn flags_supermodular_table() {
        let pots: Vec<Potential> = vec![
            EdgeCutPotential::new(0, 1, 1.0).unwrap().into(),
            RegionPotential::new(vec![0, 1, 2]).unwrap().into(),
            TablePotential::new(vec![1, 2], vec![0.0, 1.0, 1.0, 3.0])
                .unwrap()
                .into(),
        ];
        let inst = DecomposableInstance::new(3, pots).unwrap();
        let rep = validate_instance(&inst);
        assert_eq!(rep.checked, 3);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].potential, 2);
        assert_eq!(rep.violations[0].x, Some(vec![1]));
    }
}
