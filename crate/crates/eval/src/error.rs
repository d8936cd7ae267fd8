use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("AUC is undefined without positive examples")]
    NoPositives,
    #[error("AUC is undefined without negative examples")]
    NoNegatives,
    #[error("puzzle {index}: {message}")]
    InvalidEntry { index: usize, message: String },
    #[error("run does not belong to this dataset: {0}")]
    Mismatch(String),
    #[error("journal {path}: {source}")]
    Journal {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
