use crate::base::{greedy_vertex, BlockVector};
use crate::error::{DsfmError, Result};
use crate::potentials::Potential;
use crate::set_function::{GroundSet, PotentialKind, SetFunction};

/// `f = Σ_i f_i` over a ground set, each `f_i` with its own small support.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct DecomposableInstance {
    ground: GroundSet,
    potentials: Vec<Potential>,
    ground_ids: Vec<usize>,
    /// For every element, the `(block, local index)` pairs that contain it.
    incidence: Vec<Vec<(usize, usize)>>,
}

impl DecomposableInstance {
    pub fn new(n: usize, potentials: Vec<Potential>) -> Result<Self> {
        let ground = GroundSet::new(n)?;
        if potentials.is_empty() {
            return Err(DsfmError::Input(
                "instance needs at least one potential".into(),
            ));
        }
        let mut incidence = vec![Vec::new(); n];
        for (i, p) in potentials.iter().enumerate() {
            let ids = p.support();
            if ids.is_empty() {
                return Err(DsfmError::Input(format!(
                    "potential {i} has an empty support"
                )));
            }
            for (j, &v) in ids.iter().enumerate() {
                if !ground.contains(v) {
                    return Err(DsfmError::Input(format!(
                        "potential {i} refers to element {v}, ground set has {n}"
                    )));
                }
                if incidence[v].last().is_some_and(|&(b, _)| b == i) {
                    return Err(DsfmError::Input(format!(
                        "potential {i} lists element {v} twice"
                    )));
                }
                incidence[v].push((i, j));
            }
        }
        Ok(DecomposableInstance {
            ground,
            potentials,
            ground_ids: (0..n).collect(),
            incidence,
        })
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn r(&self) -> usize {
        self.potentials.len()
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn potentials(&self) -> &[Potential] {
        &self.potentials
    }

    pub fn potential(&self, i: usize) -> &Potential {
        &self.potentials[i]
    }

    pub fn supports(&self) -> Vec<&[usize]> {
        self.potentials.iter().map(|p| p.support()).collect()
    }

    /// `(block, local index)` pairs of the potentials containing `v`.
    pub fn incidence(&self, v: usize) -> &[(usize, usize)] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn kinds(&self) -> Vec<PotentialKind> {
        self.potentials.iter().map(|p| p.kind()).collect()
    }

    pub fn total_support(&self) -> usize {
        self.potentials.iter().map(|p| p.support_len()).sum()
    }

    /// `f(S) = Σ_i f_i(S ∩ C_i)`.
    pub fn evaluate(&self, set: &[usize]) -> Result<f64> {
        let mut members = vec![false; self.n()];
        for &v in set {
            if !self.ground.contains(v) {
                return Err(DsfmError::Input(format!(
                    "element {v} outside ground set of size {}",
                    self.n()
                )));
            }
            members[v] = true;
        }
        Ok(self.evaluate_members(&members))
    }

    /// Value of the set given as a membership vector over the ground set.
    pub fn evaluate_members(&self, members: &[bool]) -> f64 {
        let mut scratch = Vec::new();
        self.potentials
            .iter()
            .map(|p| {
                scratch.clear();
                scratch.extend(p.support().iter().map(|&v| members[v]));
                p.eval_local(&scratch)
            })
            .sum()
    }

    /// `f` on every prefix of a permutation of the ground set.
    ///
    /// Costs one chain evaluation per potential instead of `n` full evaluations.
    pub fn prefix_values(&self, order: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut rank = vec![usize::MAX; n];
        for (k, &v) in order.iter().enumerate() {
            rank[v] = k;
        }
        let mut increments = vec![0.0; order.len() + 1];
        let mut local: Vec<usize> = Vec::new();
        for p in &self.potentials {
            let ids = p.support();
            local.clear();
            local.extend(0..ids.len());
            local.sort_by_key(|&j| rank[ids[j]]);
            let chain = p.chain_values(&local);
            for (k, &j) in local.iter().enumerate() {
                let pos = rank[ids[j]];
                if pos == usize::MAX {
                    break;
                }
                increments[pos + 1] += chain[k + 1] - chain[k];
            }
        }
        let mut acc = 0.0;
        increments
            .into_iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect()
    }

    /// Block vector of greedy vertices for the identity ordering in every block.
    pub fn greedy_start(&self) -> BlockVector {
        let blocks = self
            .potentials
            .iter()
            .map(|p| greedy_vertex(p, &vec![0.0; p.support_len()]).expect("finite zero weights"))
            .collect();
        BlockVector::from_blocks(self.n(), &self.supports(), blocks).expect("consistent supports")
    }

    /// The whole function `f` as a single set function over `V`.
    pub fn as_whole(&self) -> WholeFunction<'_> {
        WholeFunction(self)
    }

    /// Builds a block vector, checking shapes against this instance.
    pub fn block_vector(&self, blocks: Vec<Vec<f64>>) -> Result<BlockVector> {
        BlockVector::from_blocks(self.n(), &self.supports(), blocks)
    }

    pub(crate) fn ground_ids(&self) -> &[usize] {
        &self.ground_ids
    }
}

/// Adapter exposing `f = Σ f_i` through [`SetFunction`] with support `V`.
#[derive(Debug, Clone, Copy)]
pub struct WholeFunction<'a>(pub &'a DecomposableInstance);

impl SetFunction for WholeFunction<'_> {
    fn support(&self) -> &[usize] {
        self.0.ground_ids()
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Custom
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        self.0.evaluate_members(members)
    }

    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        self.0.prefix_values(order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{EdgeCutPotential, RegionPotential, UnaryPotential};

    fn small() -> DecomposableInstance {
        DecomposableInstance::new(
            4,
            vec![
                UnaryPotential::new(0, -2.0).into(),
                EdgeCutPotential::new(0, 1, 1.0).unwrap().into(),
                RegionPotential::new(vec![0, 1, 2, 3]).unwrap().into(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let inst = small();
        assert_eq!(inst.evaluate(&[]).unwrap(), 0.0);
        // -2 (unary) + 1 (cut) + 3 (region 1·3)
        assert_eq!(inst.evaluate(&[0]).unwrap(), 2.0);
        assert!(inst.evaluate(&[4]).is_err());
    }

    #[test]
    fn prefix_values_match_direct_evaluation() {
        let inst = small();
        let order = [2, 0, 3, 1];
        let pv = inst.prefix_values(&order);
        for k in 0..=4 {
            assert_eq!(pv[k], inst.evaluate(&order[..k]).unwrap());
        }
    }

    #[test]
    fn rejects_out_of_range_support() {
        let r =
            DecomposableInstance::new(2, vec![EdgeCutPotential::new(0, 2, 1.0).unwrap().into()]);
        assert!(r.is_err());
        assert!(DecomposableInstance::new(2, vec![]).is_err());
    }

    #[test]
    fn greedy_start_is_consistent() {
        let inst = small();
        let y = inst.greedy_start();
        let total: f64 = y.aggregate().iter().sum();
        assert!((total - inst.evaluate(&[0, 1, 2, 3]).unwrap()).abs() < 1e-12);
    }
}
