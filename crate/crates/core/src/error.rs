use thiserror::Error;

/// Errors raised by the numerical toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension {requested} exceeds the configured maximum {limit}")]
    AmbientOverflow { requested: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("map is not unital (deviation {0:.3e})")]
    NotUnital(f64),

    #[error("states are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("local dimension {0} must be even")]
    OddDimension(usize),

    #[error("local dimensions differ ({d_a} vs {d_b})")]
    UnequalDimensions { d_a: usize, d_b: usize },

    #[error("matrix subspace is not closed under Hermitian conjugation (residual {0:.3e})")]
    NotFlipSymmetric(f64),

    #[error("inadmissible structure index: {0}")]
    InadmissibleIndex(String),

    #[error("limit exceeded: {0}")]
    LimitExceeded(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors raised by dimension or size guards rather than bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::AmbientOverflow { .. } | Error::LimitExceeded(_))
    }
}
