use thiserror::Error;

/// Errors raised by the dictionary, its backing store and the trace tooling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bit range [{offset}, {offset}+{len}) exceeds capacity of {capacity} bits")]
    OutOfBounds { offset: u64, len: u32, capacity: u64 },

    #[error("representation invariant violated: {0}")]
    Corrupt(String),

    #[error("malformed size header: {0}")]
    Decode(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
