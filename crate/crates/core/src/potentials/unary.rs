use crate::set_function::{PotentialKind, SetFunction};

/// Labeling cost of a single pixel, normalized to `f(∅) = 0`.
///
/// `f({p}) = cost1 - cost0`; the base polytope is the single point `(delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryPotential {
    id: [usize; 1],
    delta: f64,
}

impl UnaryPotential {
    pub fn new(id: usize, delta: f64) -> Self {
        UnaryPotential { id: [id], delta }
    }

    pub fn from_costs(id: usize, cost0: f64, cost1: f64) -> Self {
        Self::new(id, cost1 - cost0)
    }

    pub fn id(&self) -> usize {
        self.id[0]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl SetFunction for UnaryPotential {
    fn support(&self) -> &[usize] {
        &self.id
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Unary
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        if members[0] {
            self.delta
        } else {
            0.0
        }
    }

    fn chain_values(&self, _order: &[usize]) -> Vec<f64> {
        vec![0.0, self.delta]
    }

    fn specialized_min_norm(&self, _w: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.delta])
    }
}
