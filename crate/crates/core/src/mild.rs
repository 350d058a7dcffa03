//! Mild (Duhamel) formulation solved by Picard iteration.
//!
//! With `S(t) = exp(tγΔ^{k'})` and nodes `t_m = m·dt`, one application of the map is
//!
//! ```text
//! (Fu)_m = S(t_m)u₀ + Σ_{j<m} S(t_m - t_j) [ (V + μΔu_j + ½Σ𝓛_i²u_j - ½θ|∇u_j|²) dt + Σ_i 𝓛_i u_j ΔW_{i,j} ]
//! ```
//!
//! evaluated by the recursion `acc_m = S(dt)(acc_{m-1} + G(u_{m-1}))`.

use crate::error::{invalid, Error, Result};
use crate::integrators::{SolverConfig, Stepper};
use crate::noise::NoisePath;
use crate::spectral::{to_physical, to_spectral, SpatialField, SpectralField};

/// Multiplies each mode by `exp(-tγ|ξ|^{2k'})`.
pub fn semigroup_apply(gamma: f64, k_prime: u32, t: f64, f: &SpectralField) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(invalid("t", format!("must be >= 0, got {t}")));
    }
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", format!("must be >= 0, got {gamma}")));
    }
    let factors: Vec<f64> = f
        .grid()
        .wave_norms_sq()
        .iter()
        .map(|&n2| (-t * gamma * n2.powi(k_prime as i32)).exp())
        .collect();
    Ok(f.apply_symbol(&factors))
}

pub struct MildProblem {
    cfg: SolverConfig,
    path: NoisePath,
    steps: usize,
    step_factor: Vec<f64>,
}

impl MildProblem {
    /// Requires `γ > 0`; the path is coarsened to the configuration step.
    pub fn new(cfg: SolverConfig, path: &NoisePath) -> Result<Self> {
        if !(cfg.gamma > 0.0) {
            return Err(invalid(
                "gamma",
                "the mild solver needs a smoothing semigroup, gamma must be > 0",
            ));
        }
        let audit = cfg.validate()?;
        if path.dim() != cfg.initial.grid().dim() {
            return Err(Error::Precondition("path dimension differs from the grid".into()));
        }
        let path = path.at_step(cfg.dt)?;
        if path.steps() < audit.steps {
            return Err(Error::Precondition(format!(
                "path horizon {} shorter than {}",
                path.horizon(),
                cfg.horizon
            )));
        }
        let step_factor = cfg
            .initial
            .grid()
            .wave_norms_sq()
            .iter()
            .map(|&n2| (-cfg.dt * cfg.gamma * n2.powi(cfg.k_prime as i32)).exp())
            .collect();
        Ok(Self {
            cfg,
            path,
            steps: audit.steps,
            step_factor,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Number of intervals `M`; iterates carry `M + 1` nodes.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|m| m as f64 * self.cfg.dt).collect()
    }

    /// `u^{(0)}(t) ≡ u₀` on every node.
    pub fn initial_iterate(&self) -> Result<Vec<SpectralField>> {
        let u0 = to_spectral(&self.cfg.initial)?.dealias();
        Ok(vec![u0; self.steps + 1])
    }
}

pub fn picard_apply(prob: &MildProblem, u_grid: &[SpectralField]) -> Result<Vec<SpectralField>> {
    if u_grid.len() != prob.steps + 1 {
        return Err(Error::Precondition(format!(
            "expected {} nodes, got {}",
            prob.steps + 1,
            u_grid.len()
        )));
    }
    let cfg = &prob.cfg;
    let stepper = Stepper::new(cfg)?;
    let mut acc = to_spectral(&cfg.initial)?.dealias();
    let mut out = Vec::with_capacity(u_grid.len());
    out.push(acc.clone());
    for (j, u) in u_grid[..prob.steps].iter().enumerate() {
        let (drift, _) = stepper.ito_drift_hat(u)?;
        let mut g = drift;
        g.axpy(cfg.mu, &u.laplacian())?;
        let mut next = acc;
        next.axpy(cfg.dt, &g)?;
        next.axpy(1.0, &stepper.noise_hat(u, prob.path.increment(j))?)?;
        acc = next.apply_symbol(&prob.step_factor).dealias();
        if !acc.is_finite() {
            return Err(Error::NonFinite("Picard application"));
        }
        out.push(acc.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PicardSolution {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    /// Number of map applications performed.
    pub iterations: usize,
    /// `sup_m ‖u^{(j+1)}_m - u^{(j)}_m‖_{H^k}` per application.
    pub increments: Vec<f64>,
    /// Successive increment ratios.
    pub ratios: Vec<f64>,
    /// `sup_m ‖F u* - u*‖_{H^k}` at the returned iterate.
    pub residual: f64,
}

impl PicardSolution {
    pub fn field_at(&self, m: usize) -> SpatialField {
        to_physical(&self.fields[m])
    }

    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

fn sup_gap(a: &[SpectralField], b: &[SpectralField], k: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        sup = sup.max(x.sub(y)?.sobolev_norm(k));
    }
    Ok(sup)
}

/// Iterates `u ← F u` from `u^{(0)} ≡ u₀` until `sup_m ‖F u - u‖_{H^k} < tol`.
///
/// The returned iterate is the one whose residual met the tolerance.
pub fn fixed_point_solve(prob: &MildProblem, tol: f64, max_iter: usize) -> Result<PicardSolution> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let k = prob.cfg.k.value();
    let mut current = prob.initial_iterate()?;
    let mut increments: Vec<f64> = Vec::new();
    let mut ratios = Vec::new();
    for it in 1..=max_iter {
        let next = picard_apply(prob, &current)?;
        let inc = sup_gap(&next, &current, k)?;
        if let Some(&prev) = increments.last() {
            if prev > 0.0 {
                ratios.push(inc / prev);
            }
        }
        increments.push(inc);
        if inc < tol {
            assert!(inc < tol);
            return Ok(PicardSolution {
                times: prob.times(),
                fields: current,
                iterations: it,
                increments,
                ratios,
                residual: inc,
            });
        }
        current = next;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_increment: increments.last().copied().unwrap_or(f64::NAN),
        ratios,
    })
}
