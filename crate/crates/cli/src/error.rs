use std::io;
use std::path::PathBuf;

use shuffle_rdp_core::{AccountantError, BoundError};

/// Failures the binary maps onto its exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Precondition(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::InvalidParams(_) | BoundError::OrderTooSmall(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<AccountantError> for CliError {
    fn from(e: AccountantError) -> Self {
        match e {
            AccountantError::Bound(b) => b.into(),
            AccountantError::InvalidDelta(_) | AccountantError::InvalidEps(_) | AccountantError::ZeroRounds => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Precondition(e.to_string()),
        }
    }
}
