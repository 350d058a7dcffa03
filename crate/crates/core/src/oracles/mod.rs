//! Independent reference solutions and theorem audits.

mod burgers;
mod checks;
mod cole_hopf;
mod feynman_kac;

pub use burgers::{burgers_companion, VectorTrajectory};
pub use checks::{
    default_max_principle_tol, gamma_convergence_study, max_principle_check,
    potential_nonincreasing, uniqueness_experiment, EnvelopeSample, GammaRow, GammaStudy,
    MaxPrincipleReport, UniquenessReport,
};
pub use cole_hopf::{cole_hopf_exact, shift_field, shift_oracle, Series};
pub use feynman_kac::{feynman_kac_mc, FeynmanKacSpec, FkEstimate, TrigInterpolant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{sup_norm, to_spectral, SpatialField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub t: f64,
    pub l2: f64,
    pub linf: f64,
    pub h_beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleMetadata {
    pub dt: f64,
    pub points: usize,
    pub seed: Option<u64>,
}

/// Candidate-vs-reference errors; `pass` iff every sampled `L∞` error is within tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub oracle: String,
    pub beta: f64,
    pub tolerance: f64,
    pub rows: Vec<ErrorRow>,
    pub max_linf: f64,
    pub pass: bool,
    pub metadata: OracleMetadata,
}

/// Compares two sampled trajectories on matching times.
pub fn compare(
    oracle: &str,
    candidate: &[(f64, SpatialField)],
    reference: &[(f64, SpatialField)],
    beta: f64,
    tolerance: f64,
    metadata: OracleMetadata,
) -> Result<OracleReport> {
    if candidate.len() != reference.len() {
        return Err(Error::Precondition(format!(
            "{} candidate samples vs {} reference samples",
            candidate.len(),
            reference.len()
        )));
    }
    let mut rows = Vec::with_capacity(candidate.len());
    for ((t, u), (s, r)) in candidate.iter().zip(reference) {
        if (t - s).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::Precondition(format!("sample times differ: {t} vs {s}")));
        }
        let e = u.sub(r)?;
        rows.push(ErrorRow {
            t: *t,
            l2: e.l2_norm(),
            linf: sup_norm(&e),
            h_beta: to_spectral(&e)?.sobolev_norm(beta),
        });
    }
    let max_linf = rows.iter().map(|r| r.linf).fold(0.0, f64::max);
    Ok(OracleReport {
        oracle: oracle.to_string(),
        beta,
        tolerance,
        pass: rows.iter().all(|r| r.linf <= tolerance),
        rows,
        max_linf,
        metadata,
    })
}
