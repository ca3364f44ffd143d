use thiserror::Error;

/// Errors raised by fitting, construction and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("inadmissible moments: {0}")]
    InadmissibleMoments(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The optimizer ran out of iterations. `best` holds the best point found
    /// in the natural parameterization and `objective` its objective value.
    #[error("no convergence after {iterations} iterations (best objective {objective})")]
    NonConvergence {
        iterations: usize,
        best: Vec<f64>,
        objective: f64,
    },

    #[error("degenerate design: {0}")]
    Degenerate(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
