use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, shape, or index.
    #[error("configuration error: {0}")]
    Config(String),

    /// A configuration file key or value is wrong; `line` is 1-based, 0 for overrides.
    #[error("configuration error at line {line}: key `{key}`: {message}")]
    ConfigKey {
        key: String,
        line: usize,
        message: String,
    },

    /// An operation was called in a state where it is not allowed.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("numeric error: {message}{}", snapshot.as_deref().map(|s| format!(" [{s}]")).unwrap_or_default())]
    Numeric {
        message: String,
        snapshot: Option<String>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("tolerance failure: {0}")]
    Tolerance(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric {
            message: msg.into(),
            snapshot: None,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            Error::Config(_) | Error::ConfigKey { .. } => 3,
            Error::Io { .. } => 4,
            Error::Numeric { .. } => 5,
            Error::Tolerance(_) => 6,
        }
    }
}
