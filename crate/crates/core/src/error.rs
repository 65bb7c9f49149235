//! Error type shared by all modules.

use thiserror::Error;

/// Failure modes of the library.
///
/// `Domain` means a caller violated a documented precondition; `Numeric`
/// means an internal numerical routine could not reach its accuracy target.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
