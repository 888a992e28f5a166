//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A voltage magnitude fell below the configured floor where a division
    /// by the squared magnitude is required.
    #[error("degenerate voltage magnitude {magnitude} below floor {floor}")]
    DegenerateVoltage { magnitude: f64, floor: f64 },

    /// A state variable stopped being finite during integration.
    #[error("non-finite value in `{what}` at t = {time} s")]
    NonFinite { what: String, time: f64 },

    /// The quarter-period delay line has not yet accumulated enough samples.
    #[error("insufficient history: {have} of {need} samples buffered")]
    InsufficientHistory { have: usize, need: usize },

    /// An operating condition with no solution (negative radicand, voltage
    /// collapse, inconsistent ratings).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An iterative solver ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Scenario or configuration input rejected before any computation ran.
    #[error("invalid input: {0}")]
    Schema(String),

    /// A numerical operation failed in a way that is not an input error.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end: 2 for input
    /// problems, 3 for numerical/runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Schema(_) | Error::Json(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub fn code_name(&self) -> &'static str {
        match self {
            Error::DegenerateVoltage { .. } => "degenerate_voltage",
            Error::NonFinite { .. } => "non_finite",
            Error::InsufficientHistory { .. } => "insufficient_history",
            Error::Infeasible(_) => "infeasible",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Schema(_) => "schema",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
