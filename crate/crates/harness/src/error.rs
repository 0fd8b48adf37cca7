use std::path::PathBuf;

use rfsim_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Sim(#[from] SimError),

    /// A per-trial failure, carrying the trial index and master seed so the
    /// trial can be replayed in isolation.
    #[error("trial {trial} failed (replay with master_seed={seed}): {source}")]
    Trial { trial: usize, seed: u64, source: SimError },

    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl HarnessError {
    /// Process exit code: 2 config, 3 numerical, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Sim(_) | HarnessError::Trial { .. } => 3,
            HarnessError::Io { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
