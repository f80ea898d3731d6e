use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code specification: {0}")]
    InvalidSpec(String),
    #[error("degenerate spec: {0}")]
    DegenerateSpec(String),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no full-rank code after {attempts} attempts")]
    RankDeficient { attempts: usize },
    #[error("invalid hierarchy request: {0}")]
    InvalidHierarchy(String),
    #[error("no candidate row left to add")]
    NoRowAvailable,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
