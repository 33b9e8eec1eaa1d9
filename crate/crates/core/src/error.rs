use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input: overlapping hulls, bad cylinders, model caps, JSON schema.
    #[error("validation error: {0}")]
    Validation(String),
    /// A query point or argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An explicit work budget was exceeded.
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    /// A precondition of a construction failed (e.g. a weave ball condition).
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
