use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {requested} unsupported (maximum {max})")]
    DimensionUnsupported { requested: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("exact star discrepancy infeasible for n = {n}, k = {k}; probe with local_discrepancy instead")]
    DiscrepancyInfeasible { n: usize, k: usize },

    #[error("value {value} outside domain: {context}")]
    Domain { value: f64, context: &'static str },

    #[error("bisection did not converge: {0}")]
    NonConvergent(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at iteration {iteration}: {reason}")]
    TrainingDiverged { iteration: usize, reason: String },

    #[error("model format: {0}")]
    Format(String),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
