use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate_re:e}{estimate_im:+e}i, error bound {error_bound:e})"
    )]
    QuadratureNonConvergence {
        estimate_re: f64,
        estimate_im: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }
}
