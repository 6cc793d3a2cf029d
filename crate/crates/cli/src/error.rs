use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] symwin::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// 3 when the theory lacks a needed capability, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(symwin::Error::CapabilityMissing(_) | symwin::Error::Resource(_)) => 3,
            _ => 2,
        }
    }
}
