use thiserror::Error;

/// Error type shared by the whole crate.
#[derive(Debug, Error)]
pub enum PerclabError {
    #[error("invalid probability entry p[{row}][{col}] = {value}; entries must lie in [0, 1]")]
    InvalidProbability { row: usize, col: usize, value: f64 },

    #[error("invalid grid order M = {0}; must be in 2..=255")]
    InvalidGridOrder(usize),

    #[error("level {requested} out of range; tree depth is {depth}")]
    LevelOutOfRange { requested: usize, depth: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource budget exceeded: {needed} codes requested, cap is {cap}")]
    ResourceBudget { needed: u64, cap: u64 },

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("insufficient conditioning sample: got {got}, need at least {need}")]
    InsufficientSample { got: usize, need: usize },

    #[error("interval derivation failed: {0}")]
    DerivationFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PerclabError>;
