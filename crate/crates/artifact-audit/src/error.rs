use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    ParseLine { line: usize, msg: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("duplicate example id {id:?}")]
    DuplicateId { id: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("feature index {index} out of range (model has {rows} embedding rows)")]
    FeatureRange { index: u32, rows: usize },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("manifest does not match test set: {0}")]
    ManifestMismatch(String),

    #[error("prediction file {path}: {msg}")]
    Predictions { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
