//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MvgfError {
    /// Grid construction rejected (odd M, M < 8, unsupported dimension).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two operands live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A field has the wrong channel count for the requested operation.
    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    /// A potential or kernel specification violates its constraints.
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// Non-finite value encountered.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Iterative solver failed to reach its tolerance.
    #[error("solver stagnation: {context} (residual {residual:.3e})")]
    SolverStagnation { context: String, residual: f64 },

    /// Time step failed irrecoverably.
    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },

    /// Precondition on input data violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Scenario text failed to parse.
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed snapshot or CSV artifact.
    #[error("format error: {0}")]
    Format(String),
}
