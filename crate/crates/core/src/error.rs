use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("enumeration refused: {m} players x {k} arms exceeds the 8x8 guard")]
    EnumerationTooLarge { m: usize, k: usize },

    #[error("protocol violation: player {player} chose arm {arm} at round {round} (K = {k})")]
    ProtocolViolation {
        player: usize,
        arm: usize,
        round: u64,
        k: usize,
    },

    #[error("invalid communication plan: {0}")]
    InvalidCommPlan(String),

    #[error("matrix file, line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
