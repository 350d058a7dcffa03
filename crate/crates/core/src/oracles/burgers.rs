//! Companion viscous Burgers system for `v = ∇u` when the coefficients are constant:
//!
//! ```text
//! dv_j = Σ_i (a_i ∂_i v_j + b_i v_j) ∘ dW_i + (∂_j V + μΔv_j + γΔ^{k'}v_j - θ (v·∇) v_j) dt
//! ```
//!
//! integrated with the Stratonovich Heun scheme on the same noise path.

use crate::error::{Error, Result};
use crate::integrators::{Scheme, SolverConfig, Termination, BLOW_UP_LEVEL};
use crate::noise::NoisePath;
use crate::spectral::{to_physical, to_spectral, SpatialField, SpectralField};

#[derive(Clone, Debug)]
pub struct VectorTrajectory {
    pub snapshots: Vec<(f64, Vec<SpatialField>)>,
    pub termination: Termination,
}

impl VectorTrajectory {
    pub fn final_state(&self) -> &[SpatialField] {
        &self.snapshots.last().expect("initial snapshot").1
    }
}

struct BurgersRhs {
    symbol: Vec<f64>,
    grad_v: Vec<SpectralField>,
    a: Vec<f64>,
    b: Vec<f64>,
    cutoff: Option<crate::truncation::CutoffSpec>,
}

impl BurgersRhs {
    fn drift(&self, v: &[SpectralField]) -> Result<Vec<SpectralField>> {
        let grid = v[0].grid();
        let n = v.len();
        let phys: Vec<SpatialField> = v.iter().map(to_physical).collect();
        let sup = (0..grid.len())
            .map(|p| phys.iter().map(|c| c.values()[p].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        let theta = self.cutoff.map_or(1.0, |c| c.theta_unchecked(sup));
        let mut out = Vec::with_capacity(n);
        for vj in v {
            let mut adv = vec![0.0; grid.len()];
            for (k, vk) in phys.iter().enumerate() {
                let dk = to_physical(&vj.derivative(k)?);
                for (p, s) in adv.iter_mut().enumerate() {
                    *s += vk.values()[p] * dk.values()[p];
                }
            }
            let adv = to_spectral(&SpatialField::new(grid, adv)?)?.dealias();
            let j = out.len();
            let mut f = vj.apply_symbol(&self.symbol);
            f.axpy(1.0, &self.grad_v[j])?;
            f.axpy(-theta, &adv)?;
            out.push(f);
        }
        Ok(out)
    }

    fn noise(&self, v: &[SpectralField], dw: &[f64]) -> Result<Vec<SpectralField>> {
        v.iter()
            .map(|vj| {
                let mut g = SpectralField::zeros(vj.grid());
                for (i, &w) in dw.iter().enumerate() {
                    g.axpy(w * self.a[i], &vj.derivative(i)?)?;
                    g.axpy(w * self.b[i], vj)?;
                }
                Ok(g)
            })
            .collect()
    }
}

fn combine(base: &[SpectralField], terms: &[(f64, &[SpectralField])]) -> Result<Vec<SpectralField>> {
    base.iter()
        .enumerate()
        .map(|(j, b)| {
            let mut acc = b.clone();
            for (s, t) in terms {
                acc.axpy(*s, &t[j])?;
            }
            Ok(acc.dealias())
        })
        .collect()
}

/// Requires constant coefficients `a_i`, `b_i`; the state starts at `∇u₀`.
pub fn burgers_companion(cfg: &SolverConfig, path: &NoisePath) -> Result<VectorTrajectory> {
    let heun = SolverConfig {
        scheme: Scheme::StratHeun,
        ..cfg.clone()
    };
    let audit = heun.validate()?;
    let tag = cfg.operator.detect_special_class();
    if !tag.is_special {
        return Err(Error::Precondition(
            "Burgers companion needs constant transport coefficients".into(),
        ));
    }
    let grid = cfg.initial.grid();
    let n = grid.dim();
    if path.dim() != n {
        return Err(Error::Precondition("path dimension differs from the grid".into()));
    }
    let path = path.at_step(cfg.dt)?;
    if path.steps() < audit.steps {
        return Err(Error::Precondition("noise path shorter than the horizon".into()));
    }
    let v_hat = to_spectral(&cfg.potential)?;
    let rhs = BurgersRhs {
        symbol: cfg.symbol()?,
        grad_v: (0..n).map(|j| v_hat.derivative(j)).collect::<Result<_>>()?,
        a: cfg.operator.a().iter().map(|f| f.mean()).collect(),
        b: tag.c.clone(),
        cutoff: cfg.truncation.cutoff().copied(),
    };
    let u0 = to_spectral(&cfg.initial)?.dealias();
    let mut v: Vec<SpectralField> = (0..n).map(|j| u0.derivative(j)).collect::<Result<_>>()?;
    let snap = |v: &[SpectralField]| v.iter().map(to_physical).collect::<Vec<_>>();
    let mut snapshots = vec![(0.0, snap(&v))];
    let mut termination = Termination::Completed;
    let dt = cfg.dt;
    let mut last_t = 0.0;
    let mut snapped = true;
    for step in 0..audit.steps {
        let dw = path.increment(step);
        let f0 = rhs.drift(&v)?;
        let g0 = rhs.noise(&v, dw)?;
        let pred = combine(&v, &[(dt, &f0), (1.0, &g0)])?;
        let f1 = rhs.drift(&pred)?;
        let g1 = rhs.noise(&pred, dw)?;
        let next = combine(&v, &[(0.5 * dt, &f0), (0.5 * dt, &f1), (0.5, &g0), (0.5, &g1)])?;
        let t = (step + 1) as f64 * dt;
        let norm = next
            .iter()
            .map(|c| c.sobolev_norm(cfg.k.value()).powi(2))
            .sum::<f64>()
            .sqrt();
        if next.iter().any(|c| !c.is_finite()) || !(norm <= BLOW_UP_LEVEL) {
            termination = Termination::BlowUp {
                time: t,
                reason: format!("Burgers state norm {norm:e}"),
            };
            break;
        }
        v = next;
        last_t = t;
        snapped = false;
        if cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0 {
            snapshots.push((t, snap(&v)));
            snapped = true;
        }
    }
    if !snapped {
        snapshots.push((last_t, snap(&v)));
    }
    Ok(VectorTrajectory {
        snapshots,
        termination,
    })
}
