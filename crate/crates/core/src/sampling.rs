//! Random smooth fields for audits and property tests.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::spectral::{to_physical, SpatialField, SpectralField, TorusGrid};

/// Real field with Gaussian Fourier coefficients on `|ξ_axis| ≤ max_mode`,
/// damped by `(1 + |ξ|²)^{-1}` and scaled so the largest coefficient scale is `amplitude`.
pub fn random_smooth_field<R: Rng + ?Sized>(
    grid: TorusGrid,
    max_mode: i64,
    amplitude: f64,
    rng: &mut R,
) -> SpatialField {
    let mut spec = SpectralField::zeros(grid);
    let norms = grid.wave_norms_sq();
    for (slot, &k2) in norms.iter().enumerate() {
        let xi = grid.wave_vector(slot);
        if xi.iter().any(|k| k.abs() > max_mode) {
            continue;
        }
        // fill one representative of each ±ξ pair, mirror the other
        let neg = grid.slot(&xi.iter().map(|k| -k).collect::<Vec<_>>());
        if neg < slot {
            continue;
        }
        let scale = amplitude / (1.0 + k2);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = if neg == slot { 0.0 } else { rng.sample(StandardNormal) };
        let c = Complex64::new(re, im) * scale;
        spec.coefficients_mut()[slot] = c;
        spec.coefficients_mut()[neg] = c.conj();
    }
    to_physical(&spec)
}
