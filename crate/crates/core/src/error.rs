use thiserror::Error;

/// Unified error type for chart parsing, evaluation, and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("chart rejected: {0}")]
    ChartInvalid(String),

    #[error(
        "derivative order exceeded: requested ({requested_x}, {requested_y}), budget ({budget_x}, {budget_y})"
    )]
    OrderExceeded {
        requested_x: u32,
        requested_y: u32,
        budget_x: u32,
        budget_y: u32,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate metric: {0}")]
    Degenerate(String),

    #[error("degenerate flag: {0}")]
    DegenerateFlag(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
