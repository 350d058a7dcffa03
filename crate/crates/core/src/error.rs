use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solvers, oracles and campaign front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("Cole-Hopf transform lost positivity (min phi = {min_phi:e} at t = {time})")]
    LostPositivity { min_phi: f64, time: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last increment {last_increment:e})")]
    NonConvergence {
        iterations: usize,
        last_increment: f64,
        ratios: Vec<f64>,
    },

    #[error("configuration rejected:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error("output directory {dir} already holds artifacts for config {found}, refusing to mix with {expected}")]
    MixedOutput {
        dir: PathBuf,
        found: String,
        expected: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
