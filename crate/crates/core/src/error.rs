use thiserror::Error;

/// Failure modes shared by every module.
///
/// The variants map onto the CLI exit codes: `Config` and `Domain` are input
/// problems, `Guard` is a numeric safety limit, `Invariant` is a broken
/// post-condition detected at run time.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric guard: {0}")]
    Guard(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn guard<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Guard(msg.into()))
}
