//! Reference solutions through the Cole–Hopf transform `φ = exp(-u/(2μ))`, which turns the
//! noiseless equation into the linear `φ_t = μΔφ - Vφ/(2μ)`.

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::noise::NoisePath;
use crate::spectral::{sup_norm, to_physical, to_spectral, SpatialField, SpectralField};

/// Sampled reference trajectory `(t, u(t))`.
pub type Series = Vec<(f64, SpatialField)>;

fn check_times(times: &[f64], horizon: f64) -> Result<()> {
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev) || t > horizon * (1.0 + 1e-12) {
            return Err(invalid(
                "sample_times",
                format!("must be ascending within [0, {horizon}], got {t}"),
            ));
        }
        prev = t;
    }
    Ok(())
}

fn from_phi(phi: SpatialField, mu: f64, t: f64) -> Result<SpatialField> {
    let min = phi.min();
    if !(min > 0.0) {
        return Err(Error::LostPositivity { min_phi: min, time: t });
    }
    Ok(phi.map(|p| -2.0 * mu * p.ln()))
}

fn heat(phi: &SpectralField, mu: f64, t: f64) -> SpectralField {
    let factors: Vec<f64> = phi
        .grid()
        .wave_norms_sq()
        .iter()
        .map(|n2| (-mu * n2 * t).exp())
        .collect();
    phi.apply_symbol(&factors)
}

/// Noiseless solution at each sample time.
///
/// With `V ≡ 0` the heat flow of `φ` is applied exactly per mode. Otherwise Strang
/// splitting between the heat flow and the multiplier `exp(-Vh/(2μ))` is used at
/// substeps no longer than `substep`.
pub fn cole_hopf_exact(
    u0: &SpatialField,
    mu: f64,
    potential: &SpatialField,
    horizon: f64,
    sample_times: &[f64],
    substep: f64,
) -> Result<Series> {
    if !(mu > 0.0) {
        return Err(invalid("mu", "must be > 0"));
    }
    if !(substep > 0.0) {
        return Err(invalid("substep", "must be > 0"));
    }
    u0.grid().check_same(&potential.grid())?;
    check_times(sample_times, horizon)?;
    let phi0 = u0.map(|u| (-u / (2.0 * mu)).exp());
    if !phi0.is_finite() {
        return Err(Error::NonFinite("Cole-Hopf initial transform"));
    }
    let phi0_hat = to_spectral(&phi0)?;
    let mut out = Vec::with_capacity(sample_times.len());

    if sup_norm(potential) == 0.0 {
        for &t in sample_times {
            let phi = to_physical(&heat(&phi0_hat, mu, t));
            out.push((t, from_phi(phi, mu, t)?));
        }
        return Ok(out);
    }

    let mut phi = phi0;
    let mut now = 0.0;
    for &t in sample_times {
        let span = t - now;
        if span > 0.0 {
            let n = (span / substep - 1e-9).ceil().max(1.0) as usize;
            let h = span / n as f64;
            let half = potential.map(|v| (-v * h / (4.0 * mu)).exp());
            let factors: Vec<f64> = phi
                .grid()
                .wave_norms_sq()
                .iter()
                .map(|n2| (-mu * n2 * h).exp())
                .collect();
            for s in 0..n {
                phi = phi.zip(&half, |p, m| p * m)?;
                phi = to_physical(&to_spectral(&phi)?.apply_symbol(&factors));
                phi = phi.zip(&half, |p, m| p * m)?;
                let min = phi.min();
                if !(min > 0.0) {
                    return Err(Error::LostPositivity {
                        min_phi: min,
                        time: now + (s + 1) as f64 * h,
                    });
                }
            }
            now = t;
        }
        out.push((t, from_phi(phi.clone(), mu, t)?));
    }
    Ok(out)
}

/// `u(x - s)` evaluated as the Fourier phase `exp(-iξ·s)`.
pub fn shift_field(u: &SpatialField, shift: &[f64]) -> Result<SpatialField> {
    let grid = u.grid();
    if shift.len() != grid.dim() {
        return Err(invalid("shift", "one displacement per axis"));
    }
    let hat = to_spectral(u)?;
    let coeffs = hat
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let phase: f64 = grid
                .wave_vector(j)
                .iter()
                .zip(shift)
                .map(|(&xi, s)| xi as f64 * s)
                .sum();
            c * Complex64::from_polar(1.0, -phase)
        })
        .collect();
    Ok(to_physical(&SpectralField::from_coefficients(grid, coeffs)?))
}

/// Exact solution for `𝓛_i = -√ν ∂_i`, `V ≡ 0`: the noiseless solution transported
/// by `√ν W(t)` along every axis.
pub fn shift_oracle(
    u0: &SpatialField,
    mu: f64,
    nu: f64,
    path: &NoisePath,
    horizon: f64,
    sample_times: &[f64],
) -> Result<Series> {
    if !(nu >= 0.0) {
        return Err(invalid("nu", "must be >= 0"));
    }
    let grid = u0.grid();
    if path.dim() != grid.dim() {
        return Err(Error::Precondition("path dimension differs from the grid".into()));
    }
    let base = cole_hopf_exact(u0, mu, &SpatialField::zeros(grid), horizon, sample_times, horizon)?;
    let sq = nu.sqrt();
    let mut out = Vec::with_capacity(base.len());
    for (t, v) in base {
        let ratio = t / path.dt();
        let step = ratio.round();
        if (ratio - step).abs() > 1e-6 || step as usize > path.steps() {
            return Err(Error::Precondition(format!(
                "sample time {t} is not a node of the noise path"
            )));
        }
        let w = path.brownian_at(step as usize);
        let shift: Vec<f64> = w.iter().map(|wi| sq * wi).collect();
        out.push((t, shift_field(&v, &shift)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_path;
    use crate::spectral::TorusGrid;

    fn g() -> TorusGrid {
        TorusGrid::new(1, 128).unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let z = SpatialField::zeros(g());
        let out = cole_hopf_exact(&z, 0.1, &z, 1.0, &[0.0, 0.5, 1.0], 1e-3).unwrap();
        for (_, u) in out {
            assert_eq!(sup_norm(&u), 0.0);
        }
    }

    #[test]
    fn constant_potential_shifts_linearly() {
        // V ≡ c gives u(t) = u₀ + c t exactly
        let grid = g();
        let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
        let c = 0.7;
        let v = SpatialField::constant(grid, c);
        let zero = SpatialField::zeros(grid);
        let with = cole_hopf_exact(&u0, 0.1, &v, 0.2, &[0.2], 1e-3).unwrap();
        let without = cole_hopf_exact(&u0, 0.1, &zero, 0.2, &[0.2], 1e-3).unwrap();
        let diff = with[0].1.sub(&without[0].1).unwrap();
        for d in diff.values() {
            assert!((d - c * 0.2).abs() < 1e-10);
        }
    }

    #[test]
    fn splitting_converges_at_second_order() {
        let grid = g();
        let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
        let v = SpatialField::from_fn(grid, |x| -(1.0 + x[0].cos()));
        let run = |h| cole_hopf_exact(&u0, 0.1, &v, 0.1, &[0.1], h).unwrap()[0].1.clone();
        let fine = run(1e-5);
        let e1 = sup_norm(&run(4e-3).sub(&fine).unwrap());
        let e2 = sup_norm(&run(2e-3).sub(&fine).unwrap());
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn satisfies_the_equation_numerically() {
        // centred difference in time vs spectral right-hand side -½|∇u|² + μΔu
        let grid = g();
        let mu = 0.1;
        let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
        let zero = SpatialField::zeros(grid);
        let h = 1e-4;
        let s = cole_hopf_exact(&u0, mu, &zero, 1.0, &[0.05 - h, 0.05, 0.05 + h], 1.0).unwrap();
        let dudt = s[2].1.sub(&s[0].1).unwrap().scale(0.5 / h);
        let mid = to_spectral(&s[1].1).unwrap();
        let ux = to_physical(&mid.derivative(0).unwrap());
        let lap = to_physical(&mid.laplacian());
        let rhs = lap.scale(mu).zip(&ux, |l, g| l - 0.5 * g * g).unwrap();
        assert!(sup_norm(&dudt.sub(&rhs).unwrap()) < 1e-6);
    }

    #[test]
    fn shift_is_unitary_and_invertible() {
        let grid = g();
        let u = SpatialField::from_fn(grid, |x| (x[0].sin() * 2.0).exp());
        let there = shift_field(&u, &[0.37]).unwrap();
        let back = shift_field(&there, &[-0.37]).unwrap();
        assert!(sup_norm(&back.sub(&u).unwrap()) <= 1e-12);
        assert!((there.l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
        let exact = SpatialField::from_fn(grid, |x| ((x[0] - 0.37).sin() * 2.0).exp());
        assert!(sup_norm(&there.sub(&exact).unwrap()) < 1e-10);
    }

    #[test]
    fn shift_oracle_without_noise_is_cole_hopf() {
        let grid = g();
        let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
        let path = sample_path(2, 1, 1e-3, 100).unwrap();
        let times = [0.0, 0.05, 0.1];
        let a = shift_oracle(&u0, 0.1, 0.0, &path, 0.1, &times).unwrap();
        let b = cole_hopf_exact(&u0, 0.1, &SpatialField::zeros(grid), 0.1, &times, 1.0).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert!(sup_norm(&x.sub(y).unwrap()) < 1e-13);
        }
        assert!(shift_oracle(&u0, 0.1, 0.04, &path, 0.1, &[0.0505]).is_err());
    }

    mod properties {
        use super::*;
        use crate::sampling::random_smooth_field;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn shifts_form_a_group(seed in any::<u64>(), a in -10.0f64..10.0, b in -10.0f64..10.0) {
                let u = random_smooth_field(g(), 30, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
                let two = shift_field(&shift_field(&u, &[a]).unwrap(), &[b]).unwrap();
                let one = shift_field(&u, &[a + b]).unwrap();
                prop_assert!(sup_norm(&two.sub(&one).unwrap()) <= 1e-11);
                let period = shift_field(&u, &[2.0 * std::f64::consts::PI]).unwrap();
                prop_assert!(sup_norm(&period.sub(&u).unwrap()) <= 1e-11);
                prop_assert!((shift_field(&u, &[a]).unwrap().l2_norm() - u.l2_norm()).abs() <= 1e-11);
            }
        }
    }
}
