//! Seeded Brownian increment tables with coarsening and bridge refinement.
//!
//! All time levels of a refinement study are driven by one finest path;
//! coarser runs consume sums of consecutive fine increments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// `steps × dim` table of increments `ΔW_i ~ N(0, dt)`, row-major by step.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    seed: u64,
    dim: usize,
    dt: f64,
    steps: usize,
    increments: Vec<f64>,
}

pub fn sample_path(seed: u64, dim: usize, dt: f64, steps: usize) -> Result<NoisePath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    if dim == 0 {
        return Err(invalid("dim", "need at least one Brownian motion"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = dt.sqrt();
    let increments = (0..steps * dim)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(NoisePath {
        seed,
        dim,
        dt,
        steps,
        increments,
    })
}

impl NoisePath {
    /// Path with every increment zero (noise switched off).
    pub fn silent(dim: usize, dt: f64, steps: usize) -> Self {
        Self {
            seed: 0,
            dim,
            dt,
            steps,
            increments: vec![0.0; dim * steps],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.dim..(step + 1) * self.dim]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `W(step·dt)`, summing increments in order.
    pub fn brownian_at(&self, step: usize) -> Vec<f64> {
        let mut w = vec![0.0; self.dim];
        for s in 0..step {
            for (wi, d) in w.iter_mut().zip(self.increment(s)) {
                *wi += d;
            }
        }
        w
    }

    /// Sums each run of `factor` consecutive increments.
    pub fn coarsen(&self, factor: usize) -> Result<NoisePath> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(invalid(
                "factor",
                format!("{factor} does not divide {} steps", self.steps),
            ));
        }
        let steps = self.steps / factor;
        let mut increments = vec![0.0; steps * self.dim];
        for s in 0..steps {
            for f in 0..factor {
                let fine = self.increment(s * factor + f);
                for (c, d) in increments[s * self.dim..(s + 1) * self.dim].iter_mut().zip(fine) {
                    *c += d;
                }
            }
        }
        Ok(NoisePath {
            seed: self.seed,
            dim: self.dim,
            dt: self.dt * factor as f64,
            steps,
            increments,
        })
    }

    /// Coarsened view matching a solver step `dt`, which must be an integer multiple of the path step.
    pub fn at_step(&self, dt: f64) -> Result<NoisePath> {
        let ratio = dt / self.dt;
        let factor = ratio.round();
        if factor < 1.0 || (ratio - factor).abs() > 1e-9 * ratio {
            return Err(invalid(
                "dt",
                format!("solver step {dt} is not a multiple of the path step {}", self.dt),
            ));
        }
        if factor == 1.0 {
            return Ok(self.clone());
        }
        let factor = factor as usize;
        let usable = self.steps - self.steps % factor;
        let trimmed = NoisePath {
            steps: usable,
            increments: self.increments[..usable * self.dim].to_vec(),
            ..self.clone()
        };
        trimmed.coarsen(factor)
    }

    /// Brownian-bridge halving: each increment `ΔW` splits into
    /// `ΔW/2 + √dt/2·Z` and its complement, with fresh `Z` drawn from `seed`.
    /// Coarsening the result by two recovers this path up to round-off.
    pub fn refine(&self, seed: u64) -> NoisePath {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half_sd = 0.5 * self.dt.sqrt();
        let mut increments = vec![0.0; 2 * self.steps * self.dim];
        for s in 0..self.steps {
            for (i, &dw) in self.increment(s).iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let first = 0.5 * dw + half_sd * z;
                increments[(2 * s) * self.dim + i] = first;
                increments[(2 * s + 1) * self.dim + i] = dw - first;
            }
        }
        NoisePath {
            seed: self.seed,
            dim: self.dim,
            dt: 0.5 * self.dt,
            steps: 2 * self.steps,
            increments,
        }
    }
}
