use thiserror::Error;

/// Errors raised by the engines, the pipeline and the fitters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("truncation insufficient: tail {tail:e} exceeds tolerance {tolerance:e} at cutoff {cutoff}")]
    TruncationInsufficient { cutoff: usize, tail: f64, tolerance: f64 },
    #[error("matrix is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },
    #[error("moment order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("state is not physical: {0}")]
    Unphysical(String),
    #[error("numerical instability: {0}")]
    Instability(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TruncationInsufficient { .. }
                | Error::NonUnitary { .. }
                | Error::Unphysical(_)
                | Error::Instability(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
