use thiserror::Error;

/// Errors raised by series arithmetic, germ spaces and the Lie group layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands do not live in the same space (anchors, shapes, dimensions, levels).
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation was applied outside the region where it is defined or certified.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of a check was violated by the caller.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A sampled function returned a non-finite value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// A function handed to `factorize` is not bounded holomorphic at the claimed radius.
    #[error("not boundedly holomorphic at claimed radius: {0}")]
    NotBoundedHolomorphic(String),

    /// Compatible-looking pieces disagree on an overlap.
    #[error("glue failure: {0}")]
    Glue(String),

    /// Holomorphic extension of a transition map could not be constructed.
    #[error("extension failure: {0}")]
    Extension(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
