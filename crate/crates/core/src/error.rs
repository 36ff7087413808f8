use thiserror::Error;

/// Errors produced by the bandit library.
#[derive(Debug, Error)]
pub enum Error {
    /// A dimension spec, layout, or partial assignment violates its contract.
    #[error("invalid spec: {0}")]
    Spec(String),

    /// A policy, store, or experiment configuration is unusable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Total arm count exceeds the configured enumeration cap.
    #[error("arm count {arms} exceeds cap {cap}")]
    ArmCapExceeded { arms: u128, cap: u64 },

    /// A metric was requested over an empty history.
    #[error("history is empty")]
    EmptyHistory,

    /// Malformed input data at a specific line.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for [`Error::Spec`].
    pub fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }

    /// Shorthand for [`Error::Config`].
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
