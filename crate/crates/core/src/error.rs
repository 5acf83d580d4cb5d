use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the CLI exit codes: configuration problems are
/// user errors, everything else is a numeric failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A recurrence coefficient came out non-positive or non-finite at
    /// degree `k`; rebuilding at a higher precision usually fixes it.
    #[error("precision failure at degree {k} with {bits} bits: {detail}")]
    Precision { k: usize, bits: u32, detail: String },

    #[error("evaluation point coincides with node {index}")]
    Pole { index: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
