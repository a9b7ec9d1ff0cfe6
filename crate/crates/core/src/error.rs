use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid function lives on mesh {found}, expected mesh {expected}")]
    MeshMismatch { expected: u64, found: u64 },

    #[error("length mismatch: expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    LinearConvergence { iterations: usize, residual: f64 },

    /// The inner ROF solver ran out of iterations. Carries the last primal
    /// iterate and its duality gap.
    #[error("ROF solver did not converge in {iterations} iterations (duality gap {gap:e})")]
    RofConvergence {
        iterations: usize,
        gap: f64,
        last: Vec<f64>,
    },

    #[error("iteration stagnated: {0}")]
    Stagnation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
