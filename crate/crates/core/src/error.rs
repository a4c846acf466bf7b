use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a formula or operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structure that cannot be searched (disconnected graph, nothing left to query).
    #[error("structural error: {0}")]
    Structural(String),

    /// A reply that is not legal for the query it answers.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {field}: {message}")]
    Config { field: &'static str, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: &'static str, msg: impl Into<String>) -> Self {
        Error::Config {
            field,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
