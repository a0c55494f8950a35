use rayon::prelude::*;

use super::ProxMethod;
use crate::base::BlockVector;
use crate::error::{DsfmError, Result};
use crate::instance::DecomposableInstance;
use crate::level0::OracleTable;
use crate::set_function::SetFunction;
use crate::solver::OracleMeter;

/// Alternating projections: `x = Π_𝒫(a)` blockwise by the quadratic oracles,
/// then `a = Π_𝒜(x)` with `𝒜 = {a : Aa = 0}`, i.e. subtract `(Ax)(v)/deg(v)`
/// from every block containing `v`.
pub struct ApState<'a> {
    inst: &'a DecomposableInstance,
    oracles: &'a OracleTable,
    meter: OracleMeter,
    x: BlockVector,
    a: Vec<Vec<f64>>,
    parallel_threshold: usize,
    /// Oracle calls owed to a partially paid round.
    credit: usize,
    pub rounds: usize,
    /// `||a - x||` after each `𝒫`-projection.
    pub distances: Vec<f64>,
}

impl<'a> ApState<'a> {
    pub fn new(
        inst: &'a DecomposableInstance,
        oracles: &'a OracleTable,
        y: BlockVector,
        parallel_threshold: usize,
    ) -> Result<Self> {
        if y.num_blocks() != inst.r() || oracles.len() != inst.r() {
            return Err(DsfmError::Input("state does not match instance".into()));
        }
        let a = project_to_null_space(inst, &y);
        Ok(ApState {
            inst,
            oracles,
            meter: OracleMeter::new(inst.r()),
            x: y,
            a,
            parallel_threshold,
            credit: 0,
            rounds: 0,
            distances: Vec::new(),
        })
    }

    /// One `𝒫`-projection followed by one `𝒜`-projection.
    pub fn round(&mut self) -> Result<()> {
        let r = self.inst.r();
        let solve = |i: usize| -> Result<Vec<f64>> {
            let w: Vec<f64> = self.a[i].iter().map(|v| -v).collect();
            Ok(self
                .meter
                .quadratic(self.inst, self.oracles, i, &w, Some(self.x.block(i)))?
                .point)
        };
        let blocks: Vec<Vec<f64>> = if r >= self.parallel_threshold {
            (0..r).into_par_iter().map(solve).collect::<Result<_>>()?
        } else {
            (0..r).map(solve).collect::<Result<_>>()?
        };
        let dist2: f64 = blocks
            .iter()
            .zip(&self.a)
            .flat_map(|(x, a)| x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)))
            .sum();
        self.distances.push(dist2.sqrt());
        self.x = self.inst.block_vector(blocks)?;
        self.a = project_to_null_space(self.inst, &self.x);
        self.rounds += 1;
        Ok(())
    }

    /// `||x - Π_𝒜(x)||² = Σ_v (Ax)(v)² / deg(v)`.
    pub fn distance_to_null_space(&self) -> f64 {
        self.x
            .aggregate()
            .iter()
            .enumerate()
            .filter(|(v, _)| self.inst.degree(*v) > 0)
            .map(|(v, s)| s * s / self.inst.degree(v) as f64)
            .sum::<f64>()
            .sqrt()
    }

    pub fn x(&self) -> &BlockVector {
        &self.x
    }
}

fn project_to_null_space(inst: &DecomposableInstance, x: &BlockVector) -> Vec<Vec<f64>> {
    let agg = x.aggregate();
    inst.potentials()
        .iter()
        .zip(x.blocks())
        .map(|(p, b)| {
            p.support()
                .iter()
                .zip(b)
                .map(|(&v, &val)| val - agg[v] / inst.degree(v) as f64)
                .collect()
        })
        .collect()
}

impl ProxMethod for ApState<'_> {
    /// `steps` counts block oracle calls; a round is run once `r` are paid for.
    fn advance(&mut self, steps: usize) -> Result<()> {
        let r = self.inst.r();
        self.credit += steps;
        while self.credit >= r {
            self.round()?;
            self.credit -= r;
        }
        Ok(())
    }

    fn point(&self) -> BlockVector {
        self.x.clone()
    }

    fn aggregate(&self) -> Vec<f64> {
        self.x.aggregate().to_vec()
    }

    fn meter(&self) -> &OracleMeter {
        &self.meter
    }
}
