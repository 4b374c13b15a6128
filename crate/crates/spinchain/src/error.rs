use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain config: {0}")]
    Config(String),
    #[error("neighbor context {ctx} does not fit qubit {qubit} of an L={len} chain")]
    Context { qubit: usize, len: usize, ctx: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("state not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("invalid pulse: {0}")]
    Pulse(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("cannot compile gate: {0}")]
    Gate(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("empty sweep grid: {0}")]
    EmptyGrid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
