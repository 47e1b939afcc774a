use thiserror::Error;

#[derive(Debug, Error)]
pub enum CqeError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input not positive semidefinite: diagonal residual {0:e}")]
    NotPsd(f64),

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CqeError>;

pub(crate) fn arg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(CqeError::Argument(msg.into()))
}
