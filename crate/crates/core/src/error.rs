use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in parameter vector")]
    NonFinite,

    #[error("empty box at coordinate {index}: lower {lower} > upper {upper}")]
    EmptyBox { index: usize, lower: f64, upper: f64 },

    #[error(
        "epsilon = {epsilon} is outside the convergence regime (gamma/beta = {ratio}); \
         the theorem step schedule is invalid here, configure the epsilon-free override schedule"
    )]
    Regime { epsilon: f64, ratio: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter outside the environment domain: {0}")]
    OutsideDomain(String),

    #[error("operation not available for this environment: {0}")]
    Unavailable(&'static str),

    #[error("inner solver did not reach tolerance after {iterations} iterations (gradient norm {residual:e})")]
    SolverNoConvergence { iterations: usize, residual: f64 },

    #[error("repeated risk minimization did not converge in {rounds} rounds (last step {last_step:e})")]
    FixedPointNoConvergence { rounds: usize, last_step: f64 },

    #[error("unequal sample counts: {left} vs {right}")]
    UnequalSampleCounts { left: usize, right: usize },

    #[error("need at least {needed} traces, got {got}")]
    TooFewTraces { needed: usize, got: usize },

    #[error("empty dataset")]
    EmptyDataset,
}

pub type Result<T> = std::result::Result<T, Error>;
