use thiserror::Error;

/// Errors produced by family evaluation, smoothing construction and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("outside domain: {0}")]
    Domain(String),

    #[error("point not covered by the family parameter range: {0}")]
    Coverage(String),

    #[error("numeric method failed to converge: {0}")]
    Numeric(String),

    #[error("integration failed at x = {last_x}: {msg}")]
    Integration { last_x: f64, msg: String },

    #[error("solution left the domain box at x = {exit_x}")]
    Truncation { exit_x: f64 },

    #[error("monotonicity violated: {0}")]
    Monotonicity(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
