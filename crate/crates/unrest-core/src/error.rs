//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// File could not be read or written.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// Input content did not parse (bad JSON line rate, bad CSV, bad config).
    #[error("format: {0}")]
    Format(String),
    /// Inputs parsed but disagree with each other (missing region, length
    /// mismatch, duplicate key, wrong dimension).
    #[error("schema: {0}")]
    Schema(String),
    /// A value or argument is outside its domain.
    #[error("invalid: {0}")]
    Invalid(String),
    /// An internal invariant was violated; indicates a bug, not bad input.
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable code, used as the stderr prefix by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "E-IO",
            Error::Format(_) => "E-FORMAT",
            Error::Schema(_) => "E-SCHEMA",
            Error::Invalid(_) => "E-INVALID",
            Error::Internal(_) => "E-INTERNAL",
        }
    }

    /// True for errors that signal a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_))
    }
}
