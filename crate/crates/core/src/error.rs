use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("filter annihilates state (success probability {0:e})")]
    FilterAnnihilates(f64),

    #[error("v = {v} exceeds (d+1)/(2d) = {limit}; q would be negative, use the all-v route")]
    UseAllVRoute { v: f64, limit: f64 },

    #[error("negative eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("malformed conic program: {0}")]
    Program(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no sign change on the bracketing interval")]
    NoSignChange,

    #[error("all counts are zero")]
    EmptyCounts,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
