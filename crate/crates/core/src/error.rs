use thiserror::Error;

/// Errors produced by the eavesdropping library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested attack cannot be physically realized.
    #[error("infeasible attack: {0}")]
    Infeasible(String),

    /// Four unit vectors with the requested overlaps do not exist.
    #[error("pyramid geometry infeasible: radicand {index} = {value:e}")]
    Geometry { index: usize, value: f64 },

    /// No feasible point was found by the optimizer.
    #[error("optimization failed at D = {disturbance}: {reason}")]
    Optimization { disturbance: f64, reason: String },

    /// An internal numerical check failed.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Malformed attack or parameter file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
