use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot combine an empty set of probabilities")]
    EmptyProbabilities,

    #[error("weights: {0}")]
    InvalidWeights(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("missing header")]
    MissingHeader,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("non-monotone timestamp at row {row}")]
    NonMonotoneTimestamp { row: usize },

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("model format: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(row: usize, column: &str, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            column: column.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn in_file(self, path: impl AsRef<std::path::Path>) -> Self {
        Error::File {
            path: path.as_ref().display().to_string(),
            source: Box::new(self),
        }
    }
}
