//! Smooth cut-off of the gradient nonlinearity and the associated stopping rule.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::{gradient, grad_sup_norm_spectral, to_spectral, SpatialField, SpectralField, TorusGrid};

/// Sup of `|θ_r'|` for the quintic bridge, attained at the midpoint `r + ½`.
pub const CUTOFF_LIPSCHITZ: f64 = 15.0 / 8.0;

/// Cut-off radius `r`, the quintic `θ_r` and the discrete embedding constant `C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CutoffSpec {
    pub r: f64,
    pub lipschitz_bound: f64,
    pub sobolev_constant: f64,
}

/// First sampled crossing of `‖u‖_{H^k} ≥ r/C`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StoppingEvent {
    pub hit: bool,
    pub time: Option<f64>,
}

impl CutoffSpec {
    pub fn new(r: f64, grid: &TorusGrid, k: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("r", format!("must be finite and > 0, got {r}")));
        }
        Ok(Self {
            r,
            lipschitz_bound: CUTOFF_LIPSCHITZ,
            sobolev_constant: embed_constant(k, grid.dim(), grid.points())?,
        })
    }

    /// `r / C`, the `H^k` level that defines the stopping time.
    pub fn stopping_level(&self) -> f64 {
        self.r / self.sobolev_constant
    }

    pub fn theta(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid("x", format!("θ_r is defined on [0, ∞), got {x}")));
        }
        Ok(self.theta_unchecked(x))
    }

    pub fn theta_prime(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(invalid("x", format!("θ_r is defined on [0, ∞), got {x}")));
        }
        let t = x - self.r;
        if t <= 0.0 || t >= 1.0 {
            return Ok(0.0);
        }
        Ok(-30.0 * t * t * (t - 1.0) * (t - 1.0))
    }

    pub(crate) fn theta_unchecked(&self, x: f64) -> f64 {
        let t = x - self.r;
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
        }
    }
}

fn embed_sum(k: f64, grid: &TorusGrid, power: i32) -> f64 {
    let s: f64 = grid
        .wave_norms_sq()
        .into_iter()
        .map(|k2| k2.powi(power) * (1.0 + k2).powf(-k))
        .sum();
    s.sqrt() / grid.volume().sqrt()
}

/// Cauchy–Schwarz constant of `‖∇u‖_∞ ≤ C ‖u‖_{H^k}` over the resolved modes:
/// `C = (2π)^{-n/2} (Σ_ξ |ξ|² (1 + |ξ|²)^{-k})^{1/2}`.
pub fn embed_constant(k: f64, dim: usize, points: usize) -> Result<f64> {
    if !(k > dim as f64 / 2.0 + 1.0) {
        return Err(invalid(
            "k",
            format!("embedding needs k > n/2 + 1 = {}, got {k}", dim as f64 / 2.0 + 1.0),
        ));
    }
    Ok(embed_sum(k, &TorusGrid::new(dim, points)?, 1))
}

/// Constant of `‖Δu‖_∞ ≤ C_Δ ‖u‖_{H^k}` (needs `k > n/2 + 2`).
pub fn laplacian_embed_constant(k: f64, grid: &TorusGrid) -> Result<f64> {
    if !(k > grid.dim() as f64 / 2.0 + 2.0) {
        return Err(invalid("k", format!("needs k > n/2 + 2, got {k}")));
    }
    Ok(embed_sum(k, grid, 2))
}

/// `½ θ(‖∇u‖_∞) |∇u|²` (dealiased), together with the θ value and `‖∇u‖_∞`.
/// `None` disables truncation (θ ≡ 1).
pub fn nonlinearity_spectral(
    spec: Option<&CutoffSpec>,
    u: &SpectralField,
) -> Result<(SpectralField, f64, f64)> {
    let grads = gradient(u);
    let grid = u.grid();
    let mut sq = vec![0.0; grid.len()];
    let mut sup: f64 = 0.0;
    for (j, s) in sq.iter_mut().enumerate() {
        *s = grads.iter().map(|g| g.values()[j] * g.values()[j]).sum();
        sup = sup.max(s.sqrt());
    }
    let theta = spec.map_or(1.0, |c| c.theta_unchecked(sup));
    let sq = to_spectral(&SpatialField::new(grid, sq)?)?.dealias();
    Ok((sq.scale(0.5 * theta), theta, sup))
}

pub fn truncated_nonlinearity(spec: Option<&CutoffSpec>, u: &SpatialField) -> Result<SpatialField> {
    let (n, _, _) = nonlinearity_spectral(spec, &to_spectral(u)?)?;
    Ok(crate::spectral::to_physical(&n))
}

/// θ value seen by a field.
pub fn theta_of(spec: Option<&CutoffSpec>, u: &SpectralField) -> f64 {
    spec.map_or(1.0, |c| c.theta_unchecked(grad_sup_norm_spectral(u)))
}

/// First sample where the `H^k` series reaches `r/C`; the reported time is
/// linearly interpolated between the bracketing samples.
pub fn stopping_monitor(times: &[f64], hk_norms: &[f64], spec: &CutoffSpec) -> StoppingEvent {
    let level = spec.stopping_level();
    for (i, (&t, &h)) in times.iter().zip(hk_norms).enumerate() {
        if h >= level {
            let time = if i == 0 {
                t
            } else {
                let (t0, h0) = (times[i - 1], hk_norms[i - 1]);
                t0 + (level - h0) / (h - h0) * (t - t0)
            };
            return StoppingEvent {
                hit: true,
                time: Some(time),
            };
        }
    }
    StoppingEvent {
        hit: false,
        time: None,
    }
}
