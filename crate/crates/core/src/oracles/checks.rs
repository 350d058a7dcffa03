//! Experiments auditing the qualitative statements: gradient maximum principle,
//! pathwise stability/uniqueness and convergence as the hyper-viscosity vanishes.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::integrators::{integrate, SolverConfig, Trajectory, Truncation};
use crate::noise::{sample_path, NoisePath};
use crate::spectral::{sup_norm, to_physical, to_spectral, SpatialField};
use crate::transport::w_inf_norm;
use crate::truncation::laplacian_embed_constant;

/// `10·dt + N^{-k}`.
pub fn default_max_principle_tol(dt: f64, points: usize, k: f64) -> f64 {
    10.0 * dt + (points as f64).powf(-k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub initial: f64,
    pub tol: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `‖∇u(t)‖_∞ - ‖∇u(0)‖_∞` seen.
    pub worst_margin: f64,
    pub worst_time: f64,
    pub pass: bool,
}

/// Whether `∂_i V ≤ 0` holds on every grid point for every axis.
pub fn potential_nonincreasing(potential: &SpatialField) -> Result<bool> {
    let hat = to_spectral(potential)?;
    let scale = sup_norm(potential).max(1.0);
    for i in 0..potential.grid().dim() {
        if to_physical(&hat.derivative(i)?).max() > 1e-12 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Audits `‖∇u(t)‖_∞ ≤ ‖∇u(0)‖_∞ + tol` on every diagnostics sample.
///
/// Refuses configurations outside the hypotheses: variable coefficients or a
/// potential that increases along some axis.
pub fn max_principle_check(cfg: &SolverConfig, traj: &Trajectory, tol: f64) -> Result<MaxPrincipleReport> {
    if !(tol >= 0.0) {
        return Err(invalid("tol", "must be >= 0"));
    }
    if !cfg.operator.detect_special_class().is_special {
        return Err(Error::Precondition(
            "maximum principle only holds for constant coefficients".into(),
        ));
    }
    if !potential_nonincreasing(&cfg.potential)? {
        return Err(Error::Precondition(
            "maximum principle needs ∂_i V <= 0 on the grid".into(),
        ));
    }
    let d = &traj.diagnostics;
    let initial = d[0].grad_sup;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    let mut violations = 0;
    for rec in d {
        let margin = rec.grad_sup - initial;
        if margin > worst_margin {
            worst_margin = margin;
            worst_time = rec.t;
        }
        if !(margin <= tol) {
            violations += 1;
        }
    }
    Ok(MaxPrincipleReport {
        initial,
        tol,
        samples: d.len(),
        violations,
        worst_margin,
        worst_time,
        pass: violations == 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnvelopeSample {
    pub t: f64,
    /// `‖u₁(t) - u₂(t)‖²_{L²}`.
    pub gap_sq: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub seed: u64,
    pub delta: f64,
    pub bit_identical: bool,
    pub samples: Vec<EnvelopeSample>,
    /// `max gap_sq / envelope` over the samples after `t = 0`.
    pub worst_ratio: f64,
    /// `‖u₁(T) - u₂(T)‖_{L²}`.
    pub terminal_gap: f64,
    pub pass: bool,
}

/// Twin runs on one path from `u₀` and `u₀ + δ·sin(x₁ + … + x_n)`.
///
/// With `w = u₁ - u₂`, Itô's formula and `‖Δu‖_∞ ≤ C_Δ ‖u‖_{H^k}` give
/// `d‖w‖² ≤ λ‖w‖² dt + ⟨2b - ∇·a, w²⟩ dW` with
/// `λ = C_ab + ½ C_Δ (1 + ‖u₁‖_{H^k} + ‖u₂‖_{H^k})`. The envelope integrates λ with the
/// larger endpoint value on each sample interval and bounds the martingale part
/// by `Σ_i ‖2b_i - ∂_i a_i‖_∞ |ΔW_i|` summed over steps.
pub fn uniqueness_experiment(cfg: &SolverConfig, seed: u64, delta: f64) -> Result<UniquenessReport> {
    if !(delta >= 0.0) {
        return Err(invalid("delta", "must be >= 0"));
    }
    if cfg.truncation != Truncation::Off {
        return Err(Error::Precondition(
            "the envelope is derived for the untruncated equation".into(),
        ));
    }
    let grid = cfg.initial.grid();
    let n = grid.dim();
    let mut base = cfg.clone();
    base.snapshot_every = base.sample_every;
    let steps = base.validate()?.steps;
    let path = sample_path(seed, n, cfg.dt, steps)?;
    let perturbation = SpatialField::from_fn(grid, |x| x.iter().sum::<f64>().sin());
    let mut other = base.clone();
    other.initial = base.initial.add(&perturbation.scale(delta))?;
    let (t1, t2) = rayon::join(|| integrate(&base, &path), || integrate(&other, &path));
    let (t1, t2) = (t1?, t2?);
    let bit_identical = t1.diagnostics == t2.diagnostics && t1.snapshots == t2.snapshots;

    let c_lap = laplacian_embed_constant(cfg.k.value(), &grid)?;
    let c_ab = cfg.operator.bound_constant()?;
    let mut noise_coef = Vec::with_capacity(n);
    for i in 0..n {
        let a_hat = to_spectral(&cfg.operator.a()[i])?;
        let da = to_physical(&a_hat.derivative(i)?);
        let q = cfg.operator.b()[i].scale(2.0).sub(&da)?;
        noise_coef.push(w_inf_norm(&q, 0)?);
    }

    let pairs: Vec<_> = t1.snapshots.iter().zip(&t2.snapshots).collect();
    if pairs.len() != t1.diagnostics.len() || t1.diagnostics.len() != t2.diagnostics.len() {
        return Err(Error::Precondition(
            "twin runs ended at different times; one of them blew up".into(),
        ));
    }
    let mut samples = Vec::with_capacity(pairs.len());
    let mut log_growth = 0.0;
    let mut gap0 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for (s, ((t, u1), (_, u2))) in pairs.iter().enumerate() {
        let gap_sq = u1.sub(u2)?.l2_norm().powi(2);
        if s == 0 {
            gap0 = gap_sq;
        } else {
            let (d0, d1) = (&t1.diagnostics[s - 1], &t1.diagnostics[s]);
            let (e0, e1) = (&t2.diagnostics[s - 1], &t2.diagnostics[s]);
            let norms = (d0.hk + e0.hk).max(d1.hk + e1.hk);
            let lambda = c_ab + 0.5 * c_lap * (1.0 + norms);
            log_growth += lambda * (d1.t - d0.t);
            let first = (d0.t / cfg.dt).round() as usize;
            let last = (d1.t / cfg.dt).round() as usize;
            for step in first..last {
                for (i, dw) in path.increment(step).iter().enumerate() {
                    log_growth += noise_coef[i] * dw.abs();
                }
            }
        }
        let envelope = gap0 * log_growth.exp();
        if s > 0 {
            worst_ratio = worst_ratio.max(if envelope > 0.0 {
                gap_sq / envelope
            } else if gap_sq > 0.0 {
                f64::INFINITY
            } else {
                0.0
            });
        }
        samples.push(EnvelopeSample {
            t: *t,
            gap_sq,
            envelope,
        });
    }
    let terminal_gap = samples.last().map_or(0.0, |s| s.gap_sq.sqrt());
    let pass = if delta == 0.0 {
        bit_identical
    } else {
        samples.iter().all(|s| s.gap_sq <= s.envelope)
    };
    Ok(UniquenessReport {
        seed,
        delta,
        bit_identical,
        samples,
        worst_ratio,
        terminal_gap,
        pass,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub next_gamma: f64,
    /// `sup_t ‖u^{γ} - u^{γ_next}‖_{H^β}`.
    pub diff_next: f64,
    /// `sup_t ‖u^{γ} - u^{0}‖_{H^β}`.
    pub diff_zero: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaStudy {
    pub beta: f64,
    pub slack: f64,
    pub rows: Vec<GammaRow>,
    pub monotone_next: bool,
    pub monotone_zero: bool,
    pub pass: bool,
}

fn monotone(values: impl Iterator<Item = f64>, slack: f64) -> bool {
    let v: Vec<f64> = values.collect();
    v.windows(2).all(|w| w[1] <= w[0] * slack)
}

/// Runs every `γ` of a strictly descending positive list, then `γ = 0`, on one path,
/// and tabulates `H^β` differences between consecutive runs and against `γ = 0`.
pub fn gamma_convergence_study(
    cfg: &SolverConfig,
    gammas: &[f64],
    path: &NoisePath,
    beta: f64,
) -> Result<GammaStudy> {
    let mut list: Vec<f64> = gammas.to_vec();
    if list.last() == Some(&0.0) {
        list.pop();
    }
    if list.is_empty()
        || list.iter().any(|g| !(*g > 0.0))
        || list.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(invalid("gammas", "must be positive and strictly descending"));
    }
    list.push(0.0);
    let runs: Vec<Trajectory> = list
        .par_iter()
        .map(|&gamma| {
            let mut c = cfg.clone();
            c.gamma = gamma;
            c.snapshot_every = c.sample_every;
            integrate(&c, path)
        })
        .collect::<Result<_>>()?;
    for (g, r) in list.iter().zip(&runs) {
        if !r.completed() {
            return Err(Error::Precondition(format!(
                "run at gamma = {g:e} ended early: {:?}",
                r.termination
            )));
        }
    }
    let sup_diff = |a: &Trajectory, b: &Trajectory| -> Result<f64> {
        let mut sup = 0.0f64;
        for ((_, x), (_, y)) in a.snapshots.iter().zip(&b.snapshots) {
            sup = sup.max(to_spectral(&x.sub(y)?)?.sobolev_norm(beta));
        }
        Ok(sup)
    };
    let zero = runs.last().expect("gamma = 0 run");
    let mut rows = Vec::new();
    for j in 0..list.len() - 1 {
        rows.push(GammaRow {
            gamma: list[j],
            next_gamma: list[j + 1],
            diff_next: sup_diff(&runs[j], &runs[j + 1])?,
            diff_zero: sup_diff(&runs[j], zero)?,
        });
    }
    let slack = 1.05;
    let monotone_next = monotone(rows.iter().map(|r| r.diff_next), slack);
    let monotone_zero = monotone(rows.iter().map(|r| r.diff_zero), slack);
    Ok(GammaStudy {
        beta,
        slack,
        rows,
        monotone_next,
        monotone_zero,
        pass: monotone_next && monotone_zero,
    })
}
