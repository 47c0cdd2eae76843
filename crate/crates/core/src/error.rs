use thiserror::Error;

/// Errors surfaced by the lab kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("svd did not converge after {sweeps} sweeps")]
    SvdNoConvergence { sweeps: usize },
    #[error("quadrature exceeded {cap} subdivisions (error estimate {error:.3e})")]
    QuadratureCap { cap: usize, error: f64 },
    #[error("dimension {dim} exceeds enumeration cap {cap}; use a Monte Carlo estimator")]
    EnumerationCap { dim: usize, cap: usize },
    #[error("box union too large: {cells} cells exceeds cap {cap}")]
    BoxBlowup { cells: u128, cap: u128 },
    #[error("rounding retry cap {0} exhausted")]
    RetryCap(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

impl From<csv::Error> for LabError {
    fn from(e: csv::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(msg()))
    }
}
