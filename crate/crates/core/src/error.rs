use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} spins, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spin index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("empty spin subset")]
    EmptySubset,

    #[error("spin {index} has norm {norm}, expected 1")]
    NotNormalized { index: usize, norm: f64 },

    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    #[error("invalid partition tree: {0}")]
    InvalidTree(String),

    #[error("degenerate action-angle frame at node {node}: {reason}")]
    DegenerateFrame { node: String, reason: String },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Hilbert space dimension {dim} exceeds the dense limit {limit}")]
    DimensionGuard { dim: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed user input rather than by the computation.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::DegenerateFrame { .. } | Error::StepUnderflow { .. } | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
