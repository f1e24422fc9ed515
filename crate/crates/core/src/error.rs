use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A hypothesis of the construction (coprimality, splitting, inertness) fails.
    #[error("hypothesis failure: {0}")]
    Hypothesis(String),

    #[error("search bound exceeded: {0}")]
    BoundExceeded(String),

    /// An internal certificate (mass, integrality, rounding gap) failed to verify.
    /// This always indicates a bug or an inconsistent model, never bad user input.
    #[error("certificate failure: {0}")]
    Certificate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)*) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)*)));
        }
    };
}
pub(crate) use ensure;
