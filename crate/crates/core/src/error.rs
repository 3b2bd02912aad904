use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("conic solver ended with status {status:?} after {iterations} iterations: {detail}")]
    Solver {
        status: SolveStatus,
        iterations: usize,
        detail: String,
    },

    #[error("design is infeasible: {family} constraints cannot be met")]
    Infeasible { family: String },

    #[error("degenerate target: |alpha| must be positive")]
    DegenerateTarget,

    #[error("eavesdropper signal term vanished at {angle_deg:.2} deg; reinitialize the beamformers")]
    VanishingSignal { angle_deg: f64 },

    #[error("matrix is not rank one within tolerance (defect {defect:.3e})")]
    NotRankOne { defect: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
