use crate::error::{DsfmError, Result};
use crate::set_function::{PotentialKind, SetFunction};

/// Largest support accepted for an explicit value table.
pub const MAX_TABLE_SUPPORT: usize = 20;

/// Explicit value table indexed by bitmask (bit `j` ↔ `ids[j]`).
///
/// Values are normalized at construction so that `f(∅) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePotential {
    ids: Vec<usize>,
    values: Vec<f64>,
}

impl TablePotential {
    pub fn new(ids: Vec<usize>, mut values: Vec<f64>) -> Result<Self> {
        let k = ids.len();
        if k == 0 || k > MAX_TABLE_SUPPORT {
            return Err(DsfmError::Input(format!(
                "table support must have 1..={MAX_TABLE_SUPPORT} elements, got {k}"
            )));
        }
        if values.len() != 1 << k {
            return Err(DsfmError::Input(format!(
                "table over {k} elements needs {} values, got {}",
                1usize << k,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DsfmError::Input("table values must be finite".into()));
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(DsfmError::Input("table lists an element twice".into()));
        }
        let base = values[0];
        values.iter_mut().for_each(|v| *v -= base);
        Ok(TablePotential { ids, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SetFunction for TablePotential {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Table
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        let mask = members
            .iter()
            .enumerate()
            .fold(0usize, |m, (j, &b)| if b { m | 1 << j } else { m });
        self.values[mask]
    }

    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        let mut mask = 0usize;
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(self.values[0]);
        for &j in order {
            mask |= 1 << j;
            out.push(self.values[mask]);
        }
        out
    }
}
