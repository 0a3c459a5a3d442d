use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument to an operation is outside its domain.
    #[error("invalid input: {0}")]
    Input(String),

    /// A configuration value violates its invariant.
    #[error("invalid value for `{key}`: {msg}")]
    Range { key: String, msg: String },

    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    /// Inconsistent or incomplete configuration (load table, masks, schedule).
    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "unknown scenario `{0}` (expected ideal, catastrophic, breaking-point or file:<path>)"
    )]
    UnknownScenario(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn range(key: &str, msg: impl Into<String>) -> Self {
        Error::Range {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
