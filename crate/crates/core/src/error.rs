use thiserror::Error;

/// Errors produced by mesh generation, assembly, solving and the drivers.
#[derive(Debug, Error)]
pub enum LdgError {
    #[error("invalid element count N={0}: must be a positive multiple of 4")]
    InvalidElementCount(usize),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature order {0} out of range 1..=20")]
    QuadratureOrder(usize),

    #[error("polynomial degree {0} out of range 0..=3")]
    Degree(usize),

    #[error("reaction coefficient b = {value:.3e} at ({x:.6e}, {y:.6e}) is not positive")]
    NonPositiveReaction { x: f64, y: f64, value: f64 },

    #[error("flux array sizes ({vertical}, {horizontal}) do not match mesh ({nx}+1, {ny}+1)")]
    FluxSizeMismatch {
        vertical: usize,
        horizontal: usize,
        nx: usize,
        ny: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("local {what} system is singular (zero pivot in column {column})")]
    SingularLocalSystem { what: &'static str, column: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("relative residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("iterative solver did not reach tolerance within {iterations} iterations (relative residual {residual:.3e})")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("no exact solution attached to the problem")]
    MissingExactSolution,

    #[error("rate computation: {0}")]
    Rates(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LdgError>;
