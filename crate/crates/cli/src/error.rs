use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("malformed JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] specshort::Error),
}

impl CliError {
    /// 3 for symmetry or positivity violations, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(specshort::Error::NotSymmetric { .. } | specshort::Error::NotPsd { .. }) => 3,
            _ => 2,
        }
    }
}
