use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("map kind `{0}` has no inverse branches")]
    UnsupportedMap(&'static str),

    #[error("inverse branches are undefined at the critical value 0")]
    ZeroArgument,

    #[error("every commutator sample overflowed ({0} samples)")]
    AllSamplesOverflowed(usize),

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("word enumeration needs {needed} words, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },

    #[error("generator {index} ({kind}) is not an entire map")]
    RationalGeneratorsRejected { index: usize, kind: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
