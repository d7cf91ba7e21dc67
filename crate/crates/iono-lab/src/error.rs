//! Process-level error taxonomy. Exit-code contract: 0 success, 2 config
//! error, 3 I/O error, 1 anything else.

use iono_core::error::MbrlError;
use iono_core::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Mbrl(#[from] MbrlError),
}

impl LabError {
    /// Sim/Mbrl errors escaping a validated config are internal faults, not
    /// usage errors; they map to the generic code.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Config(_) => 2,
            LabError::Io(_) => 3,
            LabError::Sim(_) | LabError::Mbrl(_) => 1,
        }
    }
}
