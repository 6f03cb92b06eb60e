use thiserror::Error;

/// Errors surfaced at module boundaries. Numerical routines never propagate
/// NaN/infinity; invalid inputs are rejected up front.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample must contain at least one observation")]
    EmptySample,

    #[error("non-finite observation at index {index}: {value}")]
    NonFiniteObservation { index: usize, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("exact permutation test limited to n1, n2 <= {limit}, got n1={n1}, n2={n2}")]
    PermutationTooLarge { n1: usize, n2: usize, limit: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
