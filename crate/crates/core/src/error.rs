use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum PomError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("{what} = {value} is outside the supported range {min}..={max}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("expectation value has imaginary part {0:.3e}")]
    ComplexExpectation(f64),

    #[error("probability {value:.3e} for input {x}, bit {y} is not a valid probability")]
    InvalidProbability { x: usize, y: usize, value: f64 },

    #[error("round count must be at least 1")]
    EmptyRounds,

    #[error("enumeration of {count} deterministic strategies exceeds the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("LP column length {got} does not match objective length {expected}")]
    LpShape { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PomError>;
