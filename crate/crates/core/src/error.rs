use thiserror::Error;

/// Errors produced by the inference routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (asymmetry {0:e} relative to its largest entry)")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("outside the supported regime: {0}")]
    Regime(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
