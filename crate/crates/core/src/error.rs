use alloc::string::String;

/// Errors raised by the estimation routines.
#[allow(missing_docs)]
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("degenerate sample mean")]
    DegenerateMean,

    #[error("income at position {index} is {value}; incomes must be finite and non-negative")]
    InvalidIncome { index: usize, value: f64 },

    #[error("equivalence divisor at position {index} is {value}; divisors must be finite and positive")]
    InvalidDivisor { index: usize, value: f64 },

    #[error("{field} has {found} entries but the sample has {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("quantile level {0} is outside (0, 1]")]
    QuantileLevel(f64),

    #[error("kernel argument {0} is outside (0, 1)")]
    KernelArgument(f64),

    #[error("rectangle [{a}, {b}] x [{c}, {d}] is not inside the unit square")]
    RectangleBounds { a: f64, b: f64, c: f64, d: f64 },

    #[error("confidence level {0} is outside (0, 1)")]
    ConfidenceLevel(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "quadrature did not converge: error estimate {achieved:e} above tolerance {requested:e} after {panels} panels"
    )]
    Quadrature {
        achieved: f64,
        requested: f64,
        panels: usize,
    },

    #[error("sample has no group labels")]
    MissingLabels,

    #[error("group `{0}` is empty")]
    EmptyGroup(String),

    #[error("group `{0}` is not part of the model")]
    UnknownGroup(String),

    #[error("variance assembly inconsistent: {component} = {value:e}")]
    VarianceAssembly { component: &'static str, value: f64 },
}

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}
