use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProxMethod;
use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::OracleTable;
use crate::set_function::SetFunction;
use crate::solver::OracleMeter;

/// Random coordinate descent state: `y ∈ ∏ B(f_i)` and the sampler.
pub struct RcdmState<'a> {
    inst: &'a DecomposableInstance,
    oracles: &'a OracleTable,
    meter: OracleMeter,
    y: BlockVector,
    rng: ChaCha8Rng,
    pub steps: usize,
}

impl<'a> RcdmState<'a> {
    pub fn new(
        inst: &'a DecomposableInstance,
        oracles: &'a OracleTable,
        y: BlockVector,
        seed: u64,
    ) -> Result<Self> {
        if y.num_blocks() != inst.r() || oracles.len() != inst.r() {
            return Err(DsfmError::Input("state does not match instance".into()));
        }
        Ok(RcdmState {
            inst,
            oracles,
            meter: OracleMeter::new(inst.r()),
            y,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
        })
    }

    /// Samples a block uniformly and minimizes over it exactly.
    pub fn step(&mut self) -> Result<usize> {
        let i = self.rng.gen_range(0..self.inst.r());
        self.step_block(i)?;
        Ok(i)
    }

    /// `y_i ← O_i(Ay - y_i)`.
    pub fn step_block(&mut self, i: usize) -> Result<()> {
        let ids = self.inst.potential(i).support();
        let agg = self.y.aggregate();
        let yi = self.y.block(i);
        let w: Vec<f64> = ids.iter().zip(yi).map(|(&v, &b)| agg[v] - b).collect();
        let q = self
            .meter
            .quadratic(self.inst, self.oracles, i, &w, Some(yi))?;
        self.y.set_block(i, ids, q.point);
        self.steps += 1;
        if self.steps.is_multiple_of(64 * self.inst.r()) {
            self.y.refresh_aggregate(&self.inst.supports());
        }
        Ok(())
    }

    pub fn objective(&self) -> f64 {
        self.y.half_squared_norm_of_aggregate()
    }

    pub fn y(&self) -> &BlockVector {
        &self.y
    }
}

impl ProxMethod for RcdmState<'_> {
    fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn point(&self) -> BlockVector {
        self.y.clone()
    }

    fn aggregate(&self) -> Vec<f64> {
        self.y.aggregate().to_vec()
    }

    fn meter(&self) -> &OracleMeter {
        &self.meter
    }
}
