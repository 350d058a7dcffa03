//! Monte Carlo evaluation of the linear Feynman–Kac representation
//!
//! ```text
//! φ(T, x) = E[ exp(-(1/2μ) ∫₀ᵀ V(X_s) ds) · exp(-u₀(X_T)/(2μ)) ],   dX = √(2μ) dB,  X₀ = x
//! ```
//!
//! and `u = -2μ log φ`. Fields are evaluated off-grid through their trigonometric
//! interpolant. Paths are generated in chunks; chunk `c` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, so results do not depend on the
//! number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::spectral::{to_spectral, SpatialField};

const TAU: f64 = std::f64::consts::TAU;

/// Sparse trigonometric interpolant `Σ Re(c_ξ e^{iξ·x})` over the non-negligible modes.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    modes: Vec<(Vec<f64>, Complex64)>,
}

impl TrigInterpolant {
    pub fn new(f: &SpatialField) -> Result<Self> {
        let hat = to_spectral(f)?;
        let grid = f.grid();
        let max = hat.coefficients().iter().map(|c| c.norm()).fold(0.0, f64::max);
        let modes = hat
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 1e-15 * max)
            .map(|(j, c)| (grid.wave_vector(j).iter().map(|&x| x as f64).collect(), *c))
            .collect();
        Ok(Self { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|(xi, c)| {
                let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FeynmanKacSpec {
    pub paths: usize,
    pub seed: u64,
    /// Time steps per path; only used when `V` is not identically zero.
    pub steps: usize,
    pub chunk: usize,
}

impl FeynmanKacSpec {
    pub fn new(paths: usize, seed: u64) -> Self {
        Self {
            paths,
            seed,
            steps: 100,
            chunk: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkEstimate {
    pub x: Vec<f64>,
    pub u: f64,
    /// 95% half-width of `u` from the delta method.
    pub half_width: f64,
    pub phi: f64,
    pub phi_sd: f64,
}

pub fn feynman_kac_mc(
    u0: &SpatialField,
    potential: &SpatialField,
    mu: f64,
    horizon: f64,
    x_points: &[Vec<f64>],
    spec: &FeynmanKacSpec,
) -> Result<Vec<FkEstimate>> {
    if !(mu > 0.0) {
        return Err(invalid("mu", "must be > 0"));
    }
    if !(horizon >= 0.0) {
        return Err(invalid("horizon", "must be >= 0"));
    }
    if spec.paths < 2 || spec.chunk == 0 || spec.steps == 0 {
        return Err(invalid("spec", "need >= 2 paths, chunk >= 1 and steps >= 1"));
    }
    let grid = u0.grid();
    grid.check_same(&potential.grid())?;
    let n = grid.dim();
    if x_points.iter().any(|x| x.len() != n) {
        return Err(invalid("x_points", "every point needs one coordinate per axis"));
    }
    let terminal = TrigInterpolant::new(u0)?;
    let pot = TrigInterpolant::new(potential)?;
    let has_potential = crate::spectral::sup_norm(potential) > 0.0;
    let steps = if has_potential { spec.steps } else { 1 };
    let h = horizon / steps as f64;
    let sd = (2.0 * mu * h).sqrt();
    let inv = 1.0 / (2.0 * mu);
    let chunks = spec.paths.div_ceil(spec.chunk);
    let np = x_points.len();

    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(c as u64);
            let count = spec.chunk.min(spec.paths - c * spec.chunk);
            let mut sum = vec![0.0; np];
            let mut sum_sq = vec![0.0; np];
            let mut bm = vec![0.0; n * (steps + 1)];
            let mut pos = vec![0.0; n];
            for _ in 0..count {
                for s in 1..=steps {
                    for a in 0..n {
                        let z: f64 = rng.sample(StandardNormal);
                        bm[s * n + a] = bm[(s - 1) * n + a] + sd * z;
                    }
                }
                for (p, x) in x_points.iter().enumerate() {
                    let mut integral = 0.0;
                    if has_potential {
                        let mut prev = pot.eval(x);
                        for s in 1..=steps {
                            for a in 0..n {
                                pos[a] = (x[a] + bm[s * n + a]).rem_euclid(TAU);
                            }
                            let cur = pot.eval(&pos);
                            integral += 0.5 * h * (prev + cur);
                            prev = cur;
                        }
                    } else {
                        for a in 0..n {
                            pos[a] = (x[a] + bm[steps * n + a]).rem_euclid(TAU);
                        }
                    }
                    let y = (-inv * (integral + terminal.eval(&pos))).exp();
                    sum[p] += y;
                    sum_sq[p] += y * y;
                }
            }
            (sum, sum_sq)
        })
        .collect();

    let m = spec.paths as f64;
    let mut out = Vec::with_capacity(np);
    for (p, x) in x_points.iter().enumerate() {
        let (s, s2) = partial
            .iter()
            .fold((0.0, 0.0), |(a, b), (sum, sq)| (a + sum[p], b + sq[p]));
        let phi = s / m;
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::LostPositivity {
                min_phi: phi,
                time: horizon,
            });
        }
        let var = ((s2 - m * phi * phi) / (m - 1.0)).max(0.0);
        let phi_sd = var.sqrt();
        out.push(FkEstimate {
            x: x.clone(),
            u: -2.0 * mu * phi.ln(),
            half_width: 1.96 * phi_sd / m.sqrt() * 2.0 * mu / phi,
            phi,
            phi_sd,
        });
    }
    Ok(out)
}
