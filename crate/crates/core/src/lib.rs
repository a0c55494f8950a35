//! Decomposable submodular function minimization.
//!
//! `f = Σ_i f_i` is minimized through the proximal problem
//! `min ½||Σ_i y_i||²` over `y_i ∈ B(f_i)`, solved either by flow-style
//! augmentation between blocks or by block-coordinate/projection methods on
//! top of per-potential (level-0) oracles.

pub mod base;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod gradient;
pub mod instance;
pub mod level0;
pub mod minnorm;
pub mod potentials;
pub mod set_function;
pub mod solver;

pub use base::{greedy_vertex, BasePoint, BlockVector};
pub use error::{DsfmError, Result};
pub use instance::DecomposableInstance;
pub use potentials::Potential;
pub use set_function::{PotentialKind, SetFunction};
pub use solver::{Level1Solver, SolveOptions, SolveReport, SolverRegistry};
