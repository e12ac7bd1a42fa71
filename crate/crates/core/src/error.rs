use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A face referenced by some cell is absent or appears after the cell.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("cannot partition {vertices} vertices into {parts} parts")]
    TooManyParts { parts: usize, vertices: usize },

    #[error("oracle limit exceeded: {columns} columns (max {max})")]
    OracleTooLarge { columns: usize, max: usize },

    #[error("betti mismatch: {0}")]
    BettiMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
