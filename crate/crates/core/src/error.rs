use thiserror::Error;

use crate::solver::SolveOutput;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: expected {expected}, found {found}")]
    GridMismatch { expected: String, found: String },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("ODE singularity: r(t) <= 0 at t = {time}")]
    Singularity { time: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("first step in analytic mode needs the second derivative of the initial data")]
    MissingSecondDerivative,

    #[error("zero pivot in tridiagonal factorization at row {0}")]
    ZeroPivot(usize),

    /// Non-finite values appeared after a time step. `partial` holds whatever the
    /// run had recorded up to that point.
    #[error("solver blow-up: non-finite values at step {step}")]
    BlowUp {
        step: usize,
        partial: Option<Box<SolveOutput>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Error::BlowUp { .. })
    }
}
