use thiserror::Error;

/// Errors raised by algebra construction and the numerical pipelines.
///
/// Axiom and identity failures are not errors: they are reported through
/// [`crate::report::Check`] entries so callers can inspect every residual.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("invalid group function: {0}")]
    InvalidGroupFunction(String),

    #[error("algebra is not faithful: ideal of dimension {ideal_dim}; take the quotient first")]
    NotFaithful { ideal_dim: usize },

    #[error("span is not a two-sided *-ideal (residual {residual:.3e})")]
    NotAnIdeal { residual: f64 },

    #[error("internal inconsistency: the death lies in the ideal")]
    DeathInIdeal,

    #[error("span is not a *-subalgebra containing the death (residual {residual:.3e})")]
    NotSubalgebra { residual: f64 },

    #[error("GNS covariance residual {residual:.3e} exceeds tolerance; structure constants are inconsistent")]
    CovarianceResidual { residual: f64 },

    #[error("decomposition preimage residual {residual:.3e} exceeds tolerance")]
    PreimageResidual { residual: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("state vector needs {required} entries, cap is {cap}")]
    MemoryCap { required: usize, cap: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
