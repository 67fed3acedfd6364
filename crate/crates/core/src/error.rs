use thiserror::Error;

pub type Result<T, E = BunsetsuError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BunsetsuError {
    /// Corpus text that does not follow the line format.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A model file that cannot be decoded or fails its consistency checks.
    #[error("model format: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BunsetsuError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Self::InvalidArgument(message.into())
    }
}
