use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {cause}", path.display())]
    Io { path: PathBuf, cause: std::io::Error },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("required column `{column}` is missing from the header")]
    MissingColumn { column: String },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("input contains NaN ({0})")]
    NaN(&'static str),

    #[error("feature schema does not match the model's encoder: {0}")]
    SchemaMismatch(String),

    #[error("duplicate bean id {0}")]
    DuplicateId(usize),

    #[error("training diverged at epoch {epoch} (learning rate {learning_rate}): loss is not finite")]
    Diverged { epoch: usize, learning_rate: f64 },

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, cause: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause,
        }
    }
}
