use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// Structured input could not be parsed. `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A size guard was exceeded (product alphabet, Bell-number enumeration).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A result contradicts a guaranteed property (uniqueness, call bound).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// A split loop made no progress for more iterations than there are elements.
    #[error("inconsistent oracle: split of {set_size} elements did not settle after {iterations} iterations")]
    InconsistentOracle { set_size: usize, iterations: usize },

    #[error("compressor error: {0}")]
    Compressor(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
