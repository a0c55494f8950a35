use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProxMethod;
use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::OracleTable;
use crate::set_function::SetFunction;
use crate::solver::{AcdmParams, OracleMeter};

/// Accelerated coordinate descent in the `x = θ²u + z` form, so that each
/// step touches one block of `u` and `z`.
///
/// Every epoch restarts the momentum from the better of its start and end.
pub struct AcdmState<'a> {
    inst: &'a DecomposableInstance,
    oracles: &'a OracleTable,
    meter: OracleMeter,
    z: BlockVector,
    u: BlockVector,
    theta: f64,
    /// Schedule value used by the last step; the iterate is `θ_last² u + z`.
    last_theta: f64,
    momentum: bool,
    epoch_len: usize,
    in_epoch: usize,
    epoch_start: BlockVector,
    rng: ChaCha8Rng,
    pub steps: usize,
    pub epochs: usize,
}

impl<'a> AcdmState<'a> {
    pub fn new(
        inst: &'a DecomposableInstance,
        oracles: &'a OracleTable,
        y: BlockVector,
        seed: u64,
        params: AcdmParams,
    ) -> Result<Self> {
        if y.num_blocks() != inst.r() || oracles.len() != inst.r() {
            return Err(DsfmError::Input("state does not match instance".into()));
        }
        let epoch_len = params
            .epoch_len
            .unwrap_or_else(|| (inst.r() * inst.n()).div_ceil(2))
            .max(1);
        let zeros = zero_like(inst);
        Ok(AcdmState {
            inst,
            oracles,
            meter: OracleMeter::new(inst.r()),
            epoch_start: y.clone(),
            z: y,
            u: zeros,
            theta: 1.0 / inst.r() as f64,
            last_theta: 1.0 / inst.r() as f64,
            momentum: params.momentum,
            epoch_len,
            in_epoch: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            steps: 0,
            epochs: 0,
        })
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    pub fn step(&mut self) -> Result<usize> {
        let r = self.inst.r();
        let i = self.rng.gen_range(0..r);
        let ids = self.inst.potential(i).support();
        let zi = self.z.block(i).to_vec();
        let az = self.z.aggregate();

        let new_zi = if self.momentum {
            let th2 = self.theta * self.theta;
            let step = r as f64 * self.theta;
            let au = self.u.aggregate();
            // Target z_i - g_i/(rθ) with g = A(θ²u + z) on C_i.
            let w: Vec<f64> = ids
                .iter()
                .zip(&zi)
                .map(|(&v, &zv)| -(zv - (th2 * au[v] + az[v]) / step))
                .collect();
            let q = self
                .meter
                .quadratic(self.inst, self.oracles, i, &w, Some(&zi))?;
            let coef = (1.0 - step) / th2;
            let new_ui: Vec<f64> = self
                .u
                .block(i)
                .iter()
                .zip(q.point.iter().zip(&zi))
                .map(|(&uv, (&nz, &oz))| uv - coef * (nz - oz))
                .collect();
            self.u.set_block(i, ids, new_ui);
            q.point
        } else {
            let w: Vec<f64> = ids.iter().zip(&zi).map(|(&v, &b)| az[v] - b).collect();
            self.meter
                .quadratic(self.inst, self.oracles, i, &w, Some(&zi))?
                .point
        };
        self.z.set_block(i, ids, new_zi);
        if self.momentum {
            self.last_theta = self.theta;
            let t2 = self.theta * self.theta;
            self.theta = ((t2 * t2 + 4.0 * t2).sqrt() - t2) / 2.0;
        }
        self.steps += 1;
        self.in_epoch += 1;
        if self.in_epoch == self.epoch_len {
            self.restart();
        }
        Ok(i)
    }

    /// Current iterate with the schedule value of the last completed step.
    fn iterate(&self) -> BlockVector {
        if !self.momentum || self.in_epoch == 0 {
            return self.z.clone();
        }
        let th2 = self.last_theta * self.last_theta;
        let blocks = self
            .z
            .blocks()
            .iter()
            .zip(self.u.blocks())
            .map(|(zb, ub)| zb.iter().zip(ub).map(|(z, u)| th2 * u + z).collect())
            .collect();
        self.inst
            .block_vector(blocks)
            .expect("blocks shaped like the instance")
    }

    /// Ends the epoch: keeps the better of its start and end, resets momentum.
    pub fn restart(&mut self) {
        let end = self.iterate();
        let mut better = if end.half_squared_norm_of_aggregate()
            <= self.epoch_start.half_squared_norm_of_aggregate()
        {
            end
        } else {
            self.epoch_start.clone()
        };
        better.refresh_aggregate(&self.inst.supports());
        self.z = better.clone();
        self.epoch_start = better;
        self.u = zero_like(self.inst);
        self.theta = 1.0 / self.inst.r() as f64;
        self.last_theta = self.theta;
        self.in_epoch = 0;
        self.epochs += 1;
    }

    /// Runs steps until the current epoch ends.
    pub fn epoch(&mut self) -> Result<()> {
        loop {
            self.step()?;
            if self.in_epoch == 0 {
                return Ok(());
            }
        }
    }

    pub fn objective(&self) -> f64 {
        self.iterate().half_squared_norm_of_aggregate()
    }

    pub fn z(&self) -> &BlockVector {
        &self.z
    }
}

fn zero_like(inst: &DecomposableInstance) -> BlockVector {
    let blocks = inst
        .potentials()
        .iter()
        .map(|p| vec![0.0; p.support_len()])
        .collect();
    inst.block_vector(blocks)
        .expect("blocks shaped like the instance")
}

impl ProxMethod for AcdmState<'_> {
    fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    fn point(&self) -> BlockVector {
        let mut p = self.iterate();
        p.refresh_aggregate(&self.inst.supports());
        p
    }

    fn aggregate(&self) -> Vec<f64> {
        self.iterate().aggregate().to_vec()
    }

    fn meter(&self) -> &OracleMeter {
        &self.meter
    }
}
