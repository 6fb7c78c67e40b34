use thiserror::Error;

/// Library error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A covariance-like matrix failed a positive-definiteness check.
    #[error("degenerate covariance: {matrix} is not positive definite ({detail})")]
    DegenerateCovariance { matrix: &'static str, detail: String },

    /// Two grids that must agree (shapes, spacings) do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A sampling grid is too coarse for the requested construction.
    #[error("under-resolved grid: {0}")]
    UnderResolvedGrid(String),

    /// Not enough data to carry out an estimate.
    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    /// Empty input where data was required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// An internal numerical consistency check failed.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}
