use thiserror::Error;

/// Errors raised by precondition checks and solver breakdowns.
///
/// Numerical failures that are part of an experiment's outcome (blow-up,
/// Newton non-convergence) are reported as statuses on trajectories and
/// step diagnostics, not through this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigen-decomposition failed: {0}")]
    EigenSolver(String),

    #[error("singular matrix in {0}")]
    SingularMatrix(&'static str),

    #[error("potential is not quadratic: {0}")]
    NotQuadratic(String),

    #[error("singular explicit step: denominator {0:e} vanishes")]
    SingularStep(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("reference trajectory invalid: {0}")]
    InvalidReference(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
