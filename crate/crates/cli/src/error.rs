use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),

    #[error(transparent)]
    Simulation(#[from] squeezeprobe::Error),
}

impl CliError {
    /// 1 for bad input or I/O, 2 for a numerical precondition failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Simulation(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("`--set {0}`: expected key=value")]
    BadOverride(String),

    #[error("`{key}`: {reason}")]
    Range { key: String, reason: String },
}

impl ConfigError {
    pub fn range(key: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Range {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
