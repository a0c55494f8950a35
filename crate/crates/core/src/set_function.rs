//! Set functions with a small effective support.
//!
//! Every potential addresses its support through *local* indices
//! `0..support().len()`. A subset of the support is passed around as a
//! membership slice `members[j] == true` iff `support()[j]` is in the set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DsfmError, Result};

/// Ground set `V = {0, .., n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(DsfmError::Input("ground set must be non-empty".into()));
        }
        Ok(GroundSet { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Unary,
    EdgeCut,
    Square,
    Region,
    Table,
    Custom,
}

impl PotentialKind {
    pub const ALL: [PotentialKind; 6] = [
        PotentialKind::Unary,
        PotentialKind::EdgeCut,
        PotentialKind::Square,
        PotentialKind::Region,
        PotentialKind::Table,
        PotentialKind::Custom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PotentialKind::Unary => "unary",
            PotentialKind::EdgeCut => "edge",
            PotentialKind::Square => "square",
            PotentialKind::Region => "region",
            PotentialKind::Table => "table",
            PotentialKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unary" => Some(PotentialKind::Unary),
            "edge" | "edge-cut" | "pairwise" => Some(PotentialKind::EdgeCut),
            "square" => Some(PotentialKind::Square),
            "region" => Some(PotentialKind::Region),
            "table" => Some(PotentialKind::Table),
            "custom" => Some(PotentialKind::Custom),
            _ => None,
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A normalized (`f(∅) = 0`) submodular function with effective support `C`.
pub trait SetFunction: Send + Sync + fmt::Debug {
    /// Global element ids of the effective support, in local index order.
    fn support(&self) -> &[usize];

    fn kind(&self) -> PotentialKind;

    /// Value of the subset described by `members` (one flag per support element).
    fn eval_local(&self, members: &[bool]) -> f64;

    /// Values `f(∅), f({o0}), f({o0,o1}), ..` along a permutation of local indices.
    ///
    /// The returned vector has `order.len() + 1` entries.
    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        let mut members = vec![false; self.support().len()];
        let mut out = Vec::with_capacity(order.len() + 1);
        out.push(self.eval_local(&members));
        for &j in order {
            members[j] = true;
            out.push(self.eval_local(&members));
        }
        out
    }

    /// Exact `argmin_{y ∈ B(f)} ||y + w||²` when a closed form or a
    /// function-specific algorithm exists.
    fn specialized_min_norm(&self, _w: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn support_len(&self) -> usize {
        self.support().len()
    }

    /// Value on the whole support.
    fn full_value(&self) -> f64 {
        self.eval_local(&vec![true; self.support().len()])
    }
}

/// Value of a local subset encoded as a bitmask (bit `j` ↔ local index `j`).
pub fn eval_mask(f: &dyn SetFunction, mask: u64, scratch: &mut [bool]) -> f64 {
    for (j, m) in scratch.iter_mut().enumerate() {
        *m = mask >> j & 1 == 1;
    }
    f.eval_local(scratch)
}

pub fn mask_to_members(mask: u64, len: usize) -> Vec<bool> {
    (0..len).map(|j| mask >> j & 1 == 1).collect()
}

pub fn members_to_ids(f: &dyn SetFunction, members: &[bool]) -> Vec<usize> {
    f.support()
        .iter()
        .zip(members)
        .filter(|(_, &m)| m)
        .map(|(&id, _)| id)
        .collect()
}

/// Largest support size accepted by the exhaustive submodularity check.
pub const MAX_EXHAUSTIVE_CHECK: usize = 20;

/// Exhaustive submodularity test through the local (diminishing returns)
/// characterization `f(S+a) + f(S+b) >= f(S) + f(S+a+b)`.
///
/// On failure returns the witness pair `X = S+a`, `Y = S+b` in global ids.
pub fn check_submodular(f: &dyn SetFunction, tol: f64) -> Result<()> {
    let k = f.support_len();
    if k > MAX_EXHAUSTIVE_CHECK {
        return Err(DsfmError::Capability(format!(
            "exhaustive submodularity check needs |C| <= {MAX_EXHAUSTIVE_CHECK}, got {k}"
        )));
    }
    let mut scratch = vec![false; k];
    let values: Vec<f64> = (0..1u64 << k)
        .map(|m| eval_mask(f, m, &mut scratch))
        .collect();
    for s in 0..1u64 << k {
        for a in 0..k {
            if s >> a & 1 == 1 {
                continue;
            }
            for b in a + 1..k {
                if s >> b & 1 == 1 {
                    continue;
                }
                let sa = s | 1 << a;
                let sb = s | 1 << b;
                let violation = values[s as usize] + values[(sa | sb) as usize]
                    - values[sa as usize]
                    - values[sb as usize];
                if violation > tol {
                    let ids = |m: u64| members_to_ids(f, &mask_to_members(m, k));
                    return Err(DsfmError::NotSubmodular {
                        x: ids(sa),
                        y: ids(sb),
                        violation,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Restriction/contraction of a set function: `g(S) = f(S ∪ A) - f(A)` for
/// `S` ranging over the kept elements and a fixed contracted set `A`.
#[derive(Debug)]
pub struct Minor<'a> {
    base: &'a dyn SetFunction,
    keep: Vec<usize>,
    ids: Vec<usize>,
    contracted: Vec<bool>,
    offset: f64,
}

impl<'a> Minor<'a> {
    /// `keep` and `contracted` hold local indices of `base`; they must be disjoint.
    pub fn new(base: &'a dyn SetFunction, keep: Vec<usize>, contracted: &[usize]) -> Self {
        let mut mask = vec![false; base.support_len()];
        for &j in contracted {
            mask[j] = true;
        }
        let offset = base.eval_local(&mask);
        let ids = keep.iter().map(|&j| base.support()[j]).collect();
        Minor {
            base,
            keep,
            ids,
            contracted: mask,
            offset,
        }
    }

    /// Local indices of `base` that this minor ranges over.
    pub fn kept(&self) -> &[usize] {
        &self.keep
    }
}

impl SetFunction for Minor<'_> {
    fn support(&self) -> &[usize] {
        &self.ids
    }

    fn kind(&self) -> PotentialKind {
        PotentialKind::Custom
    }

    fn eval_local(&self, members: &[bool]) -> f64 {
        let mut mask = self.contracted.clone();
        for (&j, &m) in self.keep.iter().zip(members) {
            if m {
                mask[j] = true;
            }
        }
        self.base.eval_local(&mask) - self.offset
    }

    fn chain_values(&self, order: &[usize]) -> Vec<f64> {
        // Extend the base chain: contracted elements first, then the order.
        let mut base_order: Vec<usize> = (0..self.base.support_len())
            .filter(|&j| self.contracted[j])
            .collect();
        let skip = base_order.len();
        base_order.extend(order.iter().map(|&j| self.keep[j]));
        let mut remaining: Vec<bool> = vec![true; self.base.support_len()];
        for &j in &base_order {
            remaining[j] = false;
        }
        // The base chain needs a full permutation for some implementations.
        base_order.extend((0..self.base.support_len()).filter(|&j| remaining[j]));
        let chain = self.base.chain_values(&base_order);
        chain[skip..=skip + order.len()]
            .iter()
            .map(|v| v - self.offset)
            .collect()
    }
}
