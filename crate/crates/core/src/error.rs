use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("truncated payload in frame {frame}")]
    Truncated { frame: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("category error: expected {expected}, got category {found}")]
    Category { expected: &'static str, found: usize },

    #[error("undefined statistic: {0}")]
    Statistic(&'static str),

    #[error("symbol {0} has no entry in the code table")]
    Coverage(i32),

    #[error("decode error at bit {offset}")]
    Decode { offset: u64 },

    #[error("split error: {0}")]
    Split(String),

    #[error("shape error: expected length {expected}, got {found}")]
    Shape { expected: usize, found: usize },

    #[error("model file error at key `{key}`: {message}")]
    Model { key: String, message: String },

    #[error("no samples: {0}")]
    NoSamples(String),

    #[error("stage `{stage}` failed on {}: {source}", path.display())]
    Stage {
        stage: &'static str,
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn format(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn model(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str, path: impl Into<PathBuf>) -> Self {
        Error::Stage {
            stage,
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code for the command-line front end: 2 for configuration
    /// problems, 3 for anything wrong with the data itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Category { .. } | Error::Shape { .. } => 2,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
