use crate::expr::{DiffError, EvalError, ParseError};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),

    #[error("grid mismatch: {0} vs {1} subintervals")]
    GridMismatch(usize, usize),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Diff(#[from] DiffError),

    /// An expression was structurally unsuitable (wrong free variables,
    /// non-constant where a constant is required, ...).
    #[error("expression: {0}")]
    Expression(String),

    #[error("parameter: {0}")]
    Parameter(String),

    #[error("config: {0}")]
    Config(String),

    /// A lower/upper-solution hypothesis failed validation.
    #[error("bracket validation failed: {0}")]
    Bracket(String),

    /// A result contradicts a property that is guaranteed to hold when the
    /// hypotheses are met. This is the test suite's tripwire, never routine.
    #[error("ANOMALY: {0}")]
    Anomaly(String),

    #[error("no convergence after {iterations} iterations (last delta {last_delta:.3e})")]
    NoConvergence { iterations: usize, last_delta: f64 },

    #[error("newton: {0}")]
    Newton(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
