use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("deadline must be positive and finite, got {0}")]
    InvalidDeadline(f64),

    #[error("utility argument {x} outside the domain for alpha = {alpha}")]
    UtilityDomain { alpha: f64, x: f64 },

    #[error("linear utility (alpha = 0) has no unique inverse marginal")]
    NoInverseMarginal,

    #[error("group {group} yields no reward at any deadline")]
    NoReward { group: usize },

    #[error("feedback for task {got} arrived out of order (expected task {expected})")]
    OutOfOrderFeedback { expected: u64, got: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
