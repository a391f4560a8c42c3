use thiserror::Error;

/// Errors raised by the algebra, calculus, section and equation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("instance mismatch: expected {expected}, found {found}")]
    InstanceMismatch { expected: String, found: String },

    #[error("division by {k}! exceeds the divisibility bound {bound}")]
    UnsupportedDivision { k: u32, bound: u32 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("missing sample at {point} (term i = {index})")]
    MissingSample { point: String, index: u32 },

    #[error("domain error at {point}: {reason}")]
    Domain { point: String, reason: String },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("decomposition inconsistent: {0}")]
    DecompositionInconsistent(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Self {
        Error::InstanceMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn domain(point: impl ToString, reason: impl ToString) -> Self {
        Error::Domain {
            point: point.to_string(),
            reason: reason.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
