use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input data. `line` is 1-based and counts the header row.
    #[error("{}{}: {message}", source_name.as_deref().unwrap_or("<input>"), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        source_name: Option<String>,
        line: Option<u64>,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("schema mismatch: expected {expected} features, got {actual}")]
    SchemaMismatch { expected: usize, actual: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: None,
            line,
            message: message.into(),
        }
    }

    /// Attach a file name to a parse error that was raised without one.
    pub fn with_source_name(self, name: impl Into<String>) -> Self {
        match self {
            Error::Parse {
                source_name: None,
                line,
                message,
            } => Error::Parse {
                source_name: Some(name.into()),
                line,
                message,
            },
            other => other,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 1 for configuration problems, 2 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => 1,
            Error::Io { .. } => 1,
            Error::Parse { .. }
            | Error::Data(_)
            | Error::SchemaMismatch { .. }
            | Error::Json(_) => 2,
        }
    }
}
