use thiserror::Error;

pub type Result<T> = std::result::Result<T, DsfmError>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DsfmError {
    /// Malformed or out-of-range input.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested operation is not available for this potential or size.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A level-0 answer was not optimal where an exact answer is required.
    #[error("level-0 oracle returned an inexact answer: {0}")]
    OracleExactness(String),

    /// An iterative method ran out of budget before reaching its target.
    #[error("did not converge: {0}")]
    Convergence(String),

    /// Witness pair violating f(X) + f(Y) >= f(X ∩ Y) + f(X ∪ Y).
    #[error("function is not submodular: X = {x:?}, Y = {y:?} (violation {violation:.3e})")]
    NotSubmodular {
        x: Vec<usize>,
        y: Vec<usize>,
        violation: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl DsfmError {
    /// Short machine-readable category, used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            DsfmError::Input(_) => "input",
            DsfmError::Capability(_) => "capability",
            DsfmError::OracleExactness(_) => "oracle_exactness",
            DsfmError::Convergence(_) => "convergence",
            DsfmError::NotSubmodular { .. } => "not_submodular",
            DsfmError::Internal(_) => "internal",
        }
    }
}
