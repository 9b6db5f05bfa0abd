use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Cholesky found a pivot at or below `1e-12 * max diagonal`.
    #[error("covariance shape not positive definite (pivot {pivot} = {value:e})")]
    NotSpd { pivot: usize, value: f64 },

    /// An argument fell outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A black-box functional could not produce a value for a sample.
    #[error("functional evaluation failed: {0}")]
    Functional(String),

    /// Too many replications were excluded because the functional failed.
    #[error("{failed} of {total} replications failed (limit is 1%)")]
    ExcessiveFailures { failed: usize, total: usize },

    #[error("{0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by invalid input rather than a numerical or
    /// runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::DimensionMismatch { .. } | Error::Parse(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
