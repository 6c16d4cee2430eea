use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// The variants map onto the CLI exit-code families: invalid input,
/// numerical breakdown, geometry failure and verification failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curve self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),

    #[error("point {0} lies within {1:e} of the boundary")]
    OnBoundary(String, f64),

    #[error("point {0} lies on the branch cut of log(z - zeta0)")]
    OnBranchCut(String),

    #[error("domain is not star-shaped about {0}")]
    NotStarShaped(String),

    #[error("domain does not enclose the origin")]
    OriginOutside,

    #[error("moment matrix is not positive definite: pivot {index} = {pivot:e}")]
    CholeskyBreakdown { index: usize, pivot: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("exponent overflow: real part {0:e} exceeds 700")]
    Overflow(f64),

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
