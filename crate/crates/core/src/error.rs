use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("insufficient jet: order {needed} derivative required, jet holds up to order {have}")]
    InsufficientJet { needed: usize, have: usize },

    #[error("solvability condition violated: right-hand side has component {component:e} along the kernel")]
    Solvability { component: f64 },

    #[error("derivative of order {requested} requested, only {max} available")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("nonlinearity evaluated outside its domain: {0}")]
    Domain(String),

    #[error("Newton iteration did not converge after {iters} iterations (residual {residual:e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("rank-deficient Jacobian: {0}")]
    RankDeficient(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
