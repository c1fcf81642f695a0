use std::path::PathBuf;

use kaonlab::KaonError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Kaon(#[from] KaonError),

    #[error("output: {0}")]
    Output(String),
}

impl CliError {
    /// Process exit status. 2 is left to argument parsing.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Output(_) => 4,
            CliError::Kaon(e) => match e {
                KaonError::Config(_) | KaonError::InvalidConstants(_) => 3,
                KaonError::Parse(_) => 5,
                KaonError::InvalidData(_) => 6,
                KaonError::NoData => 7,
                _ => 8,
            },
        }
    }
}
