use std::path::PathBuf;

use thiserror::Error;

/// Invalid parameters handed to one of the model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid parameter `{name}`: {reason}")]
    Invalid { name: &'static str, reason: String },
    #[error("could not generate {wanted} distinct profiles after {attempts} attempts")]
    ProfileCollision { wanted: usize, attempts: usize },
}

impl ConfigError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            name,
            reason: reason.into(),
        }
    }
}

/// Error raised while reading a configuration document.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: malformed value for `{key}`: {reason}")]
    Malformed {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("missing required key `{key}`")]
    Missing { key: String },
    #[error("line {line}: `{key}` {reason}")]
    OutOfRange {
        line: usize,
        key: String,
        reason: String,
    },
}

/// Failures while running an experiment end to end.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl RunError {
    pub fn is_config(&self) -> bool {
        matches!(self, RunError::Parse(_) | RunError::Config(_))
    }
}
