use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A value left the finite range. `step` is the 1-based optimizer step
    /// (or harness iteration) at which it was detected.
    #[error("non-finite value at step {step}, coordinate {coordinate}")]
    NonFinite { step: u64, coordinate: usize },

    #[error("non-finite value during training at epoch {epoch}, batch {batch} (coordinate {coordinate})")]
    TrainingDiverged {
        epoch: usize,
        batch: usize,
        coordinate: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bias correction degenerate: 1 - {beta}^{t} is zero")]
    DegenerateCorrection { beta: f64, t: u64 },

    #[error("unknown landscape `{0}`")]
    UnknownLandscape(String),

    #[error("unknown optimizer `{0}`")]
    UnknownOptimizer(String),

    #[error("window {window} exceeds trajectory length {len}")]
    WindowTooLarge { window: usize, len: usize },

    #[error("regret at horizon {horizon} is not positive ({value})")]
    NonPositiveRegret { horizon: usize, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
