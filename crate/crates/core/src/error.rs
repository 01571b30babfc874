use covbound_conic::SolverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("frequency band needs at least one interval")]
    EmptyBand,
    #[error("malformed interval [{lo}, {hi}]: lower end exceeds upper end")]
    MalformedInterval { lo: f64, hi: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid would hold {0} points, more than the supported maximum")]
    GridTooLarge(usize),
    #[error("invalid problem: {0}")]
    InvalidSpec(String),
    #[error("grid was built for a different band than the problem")]
    GridMismatch,
    #[error("phase must be unimodular, got modulus {0}")]
    NonUnimodularPhase(f64),
    #[error("at least one phase is required")]
    NoPhases,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

pub type Result<T> = std::result::Result<T, CoreError>;
