use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's preconditions (shapes, ranks, indices).
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative kernel failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed serialized data. `offset` is the byte position of the fault.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
