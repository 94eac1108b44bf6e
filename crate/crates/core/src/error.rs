use thiserror::Error;

/// Errors produced by the numerical kernels and the models built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("phase-space dimension must be even and positive, got {0}")]
    OddDimension(usize),
    #[error("matrix is singular (eigenvalue of modulus {modulus:e})")]
    SingularInput { modulus: f64 },
    #[error(
        "eigenvalue {re:+.6e}{im:+.6e}i lies on or wraps past the principal branch cut; \
         reduce the step duration"
    )]
    BranchCutEigenvalue { re: f64, im: f64 },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("state violates the uncertainty principle (min eigenvalue {min_eig:e})")]
    InvalidState { min_eig: f64 },
    #[error("ancilla state violates the uncertainty principle (min eigenvalue {min_eig:e})")]
    InvalidAncillaState { min_eig: f64 },
    #[error("malformed series: {0}")]
    MalformedSeries(String),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
