use thiserror::Error;

/// Errors raised by the optimizer library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown optimizer '{0}'")]
    UnknownOptimizer(String),

    #[error("optimizer {optimizer} does not accept hyperparameter '{key}'")]
    UnknownHyperparameter { optimizer: &'static str, key: String },

    #[error("optimizer {optimizer} requires hyperparameter '{key}'")]
    MissingHyperparameter { optimizer: &'static str, key: &'static str },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parameters outside the admissible region: {0}")]
    RegionViolation(String),

    #[error("convergence-bound assumption failed inside the region: {0}")]
    BoundAssumption(String),

    #[error("undefined comparison: {0}")]
    UndefinedComparison(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("IDX format error in {field}: {message}")]
    Format { field: &'static str, message: String },

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
