use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sample at {coords:?}: {reason}")]
    InvalidSample { coords: Vec<f64>, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A theorem hypothesis does not hold for the requested parameters.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("not normalizable: {0}")]
    NotNormalizable(String),

    #[error("grid spacing mismatch on axis {axis}: {left} vs {right}")]
    SpacingMismatch { axis: usize, left: f64, right: f64 },

    #[error("domain rejected: {0}")]
    DomainRejected(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
