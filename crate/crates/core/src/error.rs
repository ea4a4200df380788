use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid model: {0}")]
    Invalid(String),

    #[error("malformed belief: {0}")]
    MalformedBelief(String),

    #[error("malformed strategy: {0}")]
    Strategy(String),

    #[error("unsupported conversion: {0}")]
    Unsupported(String),

    #[error("state budget of {budget} exceeded ({reached} states constructed)")]
    Budget { budget: usize, reached: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("extracted witness failed verification: {0}")]
    Unverified(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
