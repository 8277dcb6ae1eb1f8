use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or scenario parameter is out of range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numeric argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input violates the structural contract of the operation.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An exhaustive oracle was asked to enumerate more than it allows.
    #[error("instance too large for exhaustive search: {size} > {limit} ({what})")]
    TooLarge { what: &'static str, size: usize, limit: usize },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
