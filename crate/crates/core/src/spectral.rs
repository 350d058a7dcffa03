//! Periodic grids on `[0, 2π)^n`, Fourier transforms and Fourier multipliers.
//!
//! Normalization: a spectral field stores the Fourier-series coefficients
//! `c_ξ` of the trigonometric interpolant, `f(x) = Σ_ξ c_ξ e^{iξ·x}`, so
//! `c = DFT(f) / N^n`. The physical `L²` norm carries the measure `dx`, i.e.
//! `‖f‖² = (2π/N)^n Σ_j f(x_j)²`, and the spectral side picks up a factor
//! `(2π)^n`, giving exact Parseval equality `‖f‖² = (2π)^n Σ_ξ |c_ξ|²`.
//! Wave numbers along an axis run over `{-N/2, …, N/2 - 1}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Uniform grid on the flat torus `[0, 2π)^dim` with `points` nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        points
            .checked_pow(dim as u32)
            .ok_or_else(|| Error::InvalidGrid("grid too large".into()))?;
        Ok(Self { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Total number of grid nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Quadrature weight of one node, `(2π/N)^n`.
    pub fn cell_measure(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total measure of the torus, `(2π)^n`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    /// Index along `axis` of the row-major flat index.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.points
    }

    /// Coordinate `2πj/N` of node `flat` along `axis`.
    pub fn coordinate(&self, flat: usize, axis: usize) -> f64 {
        self.axis_index(flat, axis) as f64 * self.spacing()
    }

    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        (0..self.dim).map(|a| self.coordinate(flat, a)).collect()
    }

    /// Signed wave number of FFT bin `j`.
    pub fn signed_wavenumber(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    pub fn wavenumber(&self, flat: usize, axis: usize) -> i64 {
        self.signed_wavenumber(self.axis_index(flat, axis))
    }

    pub fn wave_vector(&self, flat: usize) -> Vec<i64> {
        (0..self.dim).map(|a| self.wavenumber(flat, a)).collect()
    }

    /// `|ξ|²` for every spectral slot, in storage order.
    pub fn wave_norms_sq(&self) -> Vec<f64> {
        (0..self.len())
            .map(|f| {
                (0..self.dim)
                    .map(|a| {
                        let k = self.wavenumber(f, a) as f64;
                        k * k
                    })
                    .sum()
            })
            .collect()
    }

    /// Flat storage slot of a wave vector; components are taken modulo `N`.
    pub fn slot(&self, xi: &[i64]) -> usize {
        assert_eq!(xi.len(), self.dim, "wave vector has wrong dimension");
        let n = self.points as i64;
        xi.iter()
            .fold(0usize, |acc, &k| acc * self.points + k.rem_euclid(n) as usize)
    }

    /// Largest wave number kept by the 2/3 rule along one axis.
    pub fn dealias_limit(&self) -> i64 {
        (self.points / 3) as i64
    }

    /// `|ξ|²` of the largest mode that survives dealiasing.
    pub fn max_resolved_norm_sq(&self) -> f64 {
        let k = self.dealias_limit() as f64;
        self.dim as f64 * k * k
    }

    pub(crate) fn check_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for TorusGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T^{}[N={}]", self.dim, self.points)
    }
}

/// Real scalar grid function in physical space.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl SpatialField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values for {grid}, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    ///
    /// # Panics
    /// If `f` returns a non-finite value.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                for (a, xa) in x.iter_mut().enumerate() {
                    *xa = grid.coordinate(flat, a);
                }
                let v = f(&x);
                assert!(v.is_finite(), "non-finite sample at {x:?}");
                v
            })
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// Dealiased pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let raw = self.zip(other, |a, b| a * b)?;
        Ok(to_physical(&to_spectral(&raw)?.dealias()))
    }

    /// `⟨f, g⟩_{L²}` with the `dx` measure.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_measure())
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_measure()).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fourier-series coefficients of a grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coefficients(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients for {grid}, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn mode(&self, xi: &[i64]) -> Complex64 {
        self.coeffs[self.grid.slot(xi)]
    }

    pub fn set_mode(&mut self, xi: &[i64], value: Complex64) {
        let s = self.grid.slot(xi);
        self.coeffs[s] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| f(i, c))
                .collect(),
        }
    }

    /// Mode-wise multiplication by a real symbol table (storage order).
    pub fn apply_symbol(&self, symbol: &[f64]) -> Self {
        assert_eq!(symbol.len(), self.coeffs.len(), "symbol table size");
        self.map_modes(|i, c| c * symbol[i])
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.map_modes(|i, c| c + other.coeffs[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.map_modes(|i, c| c - other.coeffs[i]))
    }

    /// `self += s · other` in place.
    pub fn axpy(&mut self, s: f64, other: &Self) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
        Ok(())
    }

    /// `∂/∂x_axis`: multiplier `iξ_axis`, with the Nyquist slot `ξ_axis = -N/2` zeroed.
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.grid.dim() {
            return Err(invalid(
                "axis",
                format!("axis {axis} out of range for dimension {}", self.grid.dim()),
            ));
        }
        let nyq = -(self.grid.points() as i64) / 2;
        Ok(self.map_modes(|i, c| {
            let k = self.grid.wavenumber(i, axis);
            if k == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, k as f64)
            }
        }))
    }

    /// Mixed derivative `∂^α` for a multi-index `α`.
    pub fn multi_derivative(&self, alpha: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        for (axis, &order) in alpha.iter().enumerate() {
            for _ in 0..order {
                out = out.derivative(axis)?;
            }
        }
        Ok(out)
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|i, c| {
            let k2: f64 = (0..self.grid.dim())
                .map(|a| (self.grid.wavenumber(i, a) as f64).powi(2))
                .sum();
            -c * k2
        })
    }

    /// `Λ^s = (-Δ)^{s/2}`: multiplier `|ξ|^s`.
    pub fn fractional_lambda(&self, s: f64) -> Result<Self> {
        if !(s >= 0.0) {
            return Err(invalid("s", format!("order must be >= 0, got {s}")));
        }
        let norms = self.grid.wave_norms_sq();
        Ok(self.map_modes(|i, c| {
            if norms[i] == 0.0 {
                if s == 0.0 {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else {
                c * norms[i].powf(0.5 * s)
            }
        }))
    }

    /// 2/3 rule: zero every mode with some `|ξ_axis| > N/3`.
    pub fn dealias(&self) -> Self {
        let limit = self.grid.dealias_limit();
        self.map_modes(|i, c| {
            if (0..self.grid.dim()).any(|a| self.grid.wavenumber(i, a).abs() > limit) {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
    }

    /// Physical `L²` norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.volume()).sqrt()
    }

    /// `‖(I - Δ)^{k/2} f‖_{L²}`.
    pub fn sobolev_norm(&self, k: f64) -> f64 {
        let norms = self.grid.wave_norms_sq();
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&norms)
            .map(|(c, &k2)| (1.0 + k2).powf(k) * c.norm_sqr())
            .sum();
        (s * self.grid.volume()).sqrt()
    }
}

fn transform(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let n = grid.points();
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        let block = stride * n;
        for outer in (0..data.len()).step_by(block) {
            if stride == 1 {
                fft.process_with_scratch(&mut data[outer..outer + n], &mut scratch);
                continue;
            }
            for inner in 0..stride {
                let base = outer + inner;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * stride] = *l;
                }
            }
        }
    }
}

pub fn to_spectral(f: &SpatialField) -> Result<SpectralField> {
    if !f.is_finite() {
        return Err(Error::NonFinite("to_spectral input"));
    }
    let grid = f.grid;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&grid, &mut data, false);
    let norm = 1.0 / grid.len() as f64;
    for c in &mut data {
        *c *= norm;
    }
    Ok(SpectralField { grid, coeffs: data })
}

/// Inverse transform; the imaginary part (round-off for conjugate-symmetric
/// input) is discarded.
pub fn to_physical(spec: &SpectralField) -> SpatialField {
    let (values, _) = to_physical_parts(spec);
    SpatialField::from_raw(spec.grid, values)
}

/// Inverse transform returning real parts and the largest imaginary magnitude.
pub fn to_physical_parts(spec: &SpectralField) -> (Vec<f64>, f64) {
    let mut data = spec.coeffs.clone();
    transform(&spec.grid, &mut data, true);
    let max_im = data.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    (data.iter().map(|c| c.re).collect(), max_im)
}

pub fn derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    f.derivative(axis)
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.laplacian()
}

pub fn fractional_lambda(f: &SpectralField, s: f64) -> Result<SpectralField> {
    f.fractional_lambda(s)
}

pub fn dealias(f: &SpectralField) -> SpectralField {
    f.dealias()
}

/// Per-mode value `μ(-|ξ|²) - γ|ξ|^{2k'}` of the stiff linear operator `μΔ + γΔ^{k'}`.
pub fn linear_symbol(grid: &TorusGrid, mu: f64, gamma: f64, k_prime: u32) -> Result<Vec<f64>> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(invalid("mu", format!("must be finite and >= 0, got {mu}")));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", format!("must be finite and >= 0, got {gamma}")));
    }
    if k_prime.is_multiple_of(2) {
        return Err(invalid(
            "k_prime",
            format!("must be odd (an even power of Δ is anti-dissipative), got {k_prime}"),
        ));
    }
    Ok(grid
        .wave_norms_sq()
        .into_iter()
        .map(|k2| -mu * k2 - gamma * k2.powi(k_prime as i32))
        .collect())
}

pub fn sobolev_norm(f: &SpatialField, k: f64) -> Result<f64> {
    if !(k >= 0.0) {
        return Err(invalid("k", format!("must be >= 0, got {k}")));
    }
    Ok(to_spectral(f)?.sobolev_norm(k))
}

pub fn sup_norm(f: &SpatialField) -> f64 {
    f.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Physical gradient components `∂_i f`.
pub fn gradient(f: &SpectralField) -> Vec<SpatialField> {
    (0..f.grid.dim())
        .map(|a| to_physical(&f.derivative(a).expect("axis in range")))
        .collect()
}

/// Grid maximum of the Euclidean norm of `∇f`.
pub fn grad_sup_norm(f: &SpatialField) -> Result<f64> {
    Ok(grad_sup_norm_spectral(&to_spectral(f)?))
}

pub fn grad_sup_norm_spectral(f: &SpectralField) -> f64 {
    let grads = gradient(f);
    (0..f.grid.len())
        .map(|j| grads.iter().map(|g| g.values[j].powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(TorusGrid::new(1, 4).is_err());
        assert!(TorusGrid::new(1, 96).is_err());
        assert!(TorusGrid::new(0, 16).is_err());
        let g = TorusGrid::new(2, 16).unwrap();
        assert_eq!(g.len(), 256);
        assert!((g.coordinate(17, 1) - 2.0 * PI / 16.0).abs() < 1e-15);
        assert!((g.coordinate(17, 0) - 2.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = grid1(32);
        let f = to_spectral(&SpatialField::constant(g, 2.5)).unwrap();
        for (i, c) in f.coefficients().iter().enumerate() {
            if i == 0 {
                assert!((c.re - 2.5).abs() < 1e-14 && c.im.abs() < 1e-14);
            } else {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sine_occupies_plus_minus_one() {
        let g = grid1(64);
        let f = to_spectral(&SpatialField::from_fn(g, |x| x[0].sin())).unwrap();
        let p = f.mode(&[1]);
        let m = f.mode(&[-1]);
        assert!((p.norm() - 0.5).abs() < 1e-14);
        assert!((p.norm() - m.norm()).abs() < 1e-15);
        let others: f64 = f
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(i, _)| g.wavenumber(*i, 0).abs() != 1)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-14);
    }

    #[test]
    fn derivative_of_sin3x() {
        let g = grid1(128);
        let f = to_spectral(&SpatialField::from_fn(g, |x| (3.0 * x[0]).sin())).unwrap();
        let d = to_physical(&f.derivative(0).unwrap());
        let exact = SpatialField::from_fn(g, |x| 3.0 * (3.0 * x[0]).cos());
        assert!(sup_norm(&d.sub(&exact).unwrap()) <= 1e-12);
        assert!(f.derivative(1).is_err());
    }

    #[test]
    fn derivative_zeroes_nyquist() {
        let g = grid1(16);
        let mut f = SpectralField::zeros(g);
        f.set_mode(&[-8], Complex64::new(1.0, 0.0));
        assert_eq!(f.derivative(0).unwrap().mode(&[-8]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn laplacian_and_lambda_on_modes() {
        let g = grid1(64);
        let s = to_spectral(&SpatialField::from_fn(g, |x| x[0].sin())).unwrap();
        let lap = to_physical(&s.laplacian());
        let lam = to_physical(&s.fractional_lambda(2.0).unwrap());
        for (j, v) in lap.values().iter().enumerate() {
            let x = g.coordinate(j, 0);
            assert!((v + x.sin()).abs() < 1e-12);
            assert!((lam.values()[j] - x.sin()).abs() < 1e-12);
        }
        let mut two = SpectralField::zeros(g);
        two.set_mode(&[2], Complex64::new(0.3, -0.1));
        let scaled = two.fractional_lambda(1.5).unwrap().mode(&[2]);
        let expect = Complex64::new(0.3, -0.1) * 2f64.powf(1.5);
        assert!((scaled - expect).norm() < 1e-15);
        assert!(two.fractional_lambda(-1.0).is_err());
    }

    #[test]
    fn linear_symbol_values() {
        let g = grid1(16);
        let sym = linear_symbol(&g, 1.0, 0.0, 7).unwrap();
        assert_eq!(sym[g.slot(&[1])], -1.0);
        assert_eq!(sym[0], 0.0);
        let sym = linear_symbol(&g, 0.1, 1e-10, 7).unwrap();
        let expect = -0.1 * 4.0 - 1e-10 * 2f64.powi(14);
        assert!((sym[g.slot(&[2])] - expect).abs() <= 1e-15 * expect.abs());
        assert!(sym.iter().all(|&v| v <= 0.0));
        assert!(linear_symbol(&g, 0.1, 1e-10, 6).is_err());
    }

    #[test]
    fn sobolev_norms_closed_form() {
        let g = grid1(64);
        let c = SpatialField::constant(g, -1.5);
        for k in [0.0, 1.0, 3.0, 4.5] {
            let v = sobolev_norm(&c, k).unwrap();
            assert!((v - 1.5 * (2.0 * PI).sqrt()).abs() < 1e-12);
        }
        let s = SpatialField::from_fn(g, |x| x[0].sin());
        for k in [0.0, 1.0, 2.0, 3.0] {
            let v = sobolev_norm(&s, k).unwrap();
            let exact = (2f64.powf(k) * PI).sqrt();
            assert!((v - exact).abs() < 1e-12 * exact, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn grad_sup_of_sine() {
        let g = grid1(128);
        let s = SpatialField::from_fn(g, |x| x[0].sin());
        assert!((grad_sup_norm(&s).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn dealias_cutoff() {
        let g = grid1(128);
        let mut f = SpectralField::zeros(g);
        f.set_mode(&[1], Complex64::new(1.0, 0.0));
        f.set_mode(&[60], Complex64::new(1.0, 0.0));
        let d = f.dealias();
        assert_eq!(d.mode(&[1]), Complex64::new(1.0, 0.0));
        assert_eq!(d.mode(&[60]), Complex64::new(0.0, 0.0));
        assert_eq!(d.mode(&[42]), Complex64::new(0.0, 0.0));
        assert_eq!(g.dealias_limit(), 42);
    }

    #[test]
    fn dealiased_product_matches_exact_series() {
        // sin(40x)^2 = 1/2 - cos(80x)/2; on N = 128 the cos(80x) part aliases to ξ = ∓48.
        let g = grid1(128);
        let s = SpatialField::from_fn(g, |x| (40.0 * x[0]).sin());
        let raw = to_spectral(&s.zip(&s, |a, b| a * b).unwrap()).unwrap();
        assert!(raw.mode(&[-48]).norm() > 0.2, "alias expected without dealiasing");
        let p = to_spectral(&s.product(&s).unwrap()).unwrap();
        assert!(p.mode(&[-48]).norm() < 1e-14);
        assert!(p.mode(&[48]).norm() < 1e-14);
        assert!((p.mode(&[0]).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn two_dimensional_transform() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = SpatialField::from_fn(g, |x| (x[0] + 2.0 * x[1]).cos());
        let s = to_spectral(&f).unwrap();
        assert!((s.mode(&[1, 2]).re - 0.5).abs() < 1e-14);
        assert!((s.mode(&[-1, -2]).re - 0.5).abs() < 1e-14);
        let dy = to_physical(&s.derivative(1).unwrap());
        let exact = SpatialField::from_fn(g, |x| -2.0 * (x[0] + 2.0 * x[1]).sin());
        assert!(sup_norm(&dy.sub(&exact).unwrap()) < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid1(8);
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(SpatialField::new(g, v.clone()).is_err());
        let f = SpatialField::from_raw(g, v);
        assert!(matches!(to_spectral(&f), Err(Error::NonFinite(_))));
    }

    mod properties {
        use super::*;
        use crate::sampling::random_smooth_field;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        fn field(seed: u64, dim: usize, modes: i64) -> SpatialField {
            let g = TorusGrid::new(dim, if dim == 1 { 64 } else { 16 }).unwrap();
            random_smooth_field(g, modes, 1.0, &mut ChaCha8Rng::seed_from_u64(seed))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn transform_round_trip(seed in any::<u64>(), dim in 1usize..=2) {
                let u = field(seed, dim, 20);
                let back = to_physical(&to_spectral(&u).unwrap());
                prop_assert!(sup_norm(&back.sub(&u).unwrap()) <= 1e-12 * (1.0 + sup_norm(&u)));
            }

            #[test]
            fn parseval(seed in any::<u64>(), dim in 1usize..=2) {
                let u = field(seed, dim, 20);
                let a = u.l2_norm();
                let b = to_spectral(&u).unwrap().l2_norm();
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
            }

            #[test]
            fn operations_preserve_reality(seed in any::<u64>(), dim in 1usize..=2, s in 0.0f64..3.0) {
                let hat = to_spectral(&field(seed, dim, 20)).unwrap();
                for f in [hat.derivative(dim - 1).unwrap(), hat.laplacian(), hat.fractional_lambda(s).unwrap(), hat.dealias()] {
                    let (_, im) = to_physical_parts(&f);
                    prop_assert!(im <= 1e-10, "imaginary residue {im}");
                }
            }

            #[test]
            fn dealias_is_idempotent_and_norm_monotone(seed in any::<u64>(), k in 0.0f64..4.0) {
                let hat = to_spectral(&field(seed, 1, 31)).unwrap();
                let once = hat.dealias();
                prop_assert_eq!(once.dealias(), once.clone());
                prop_assert!(once.sobolev_norm(k) <= hat.sobolev_norm(k) * (1.0 + 1e-14));
            }

            #[test]
            fn sobolev_norm_increases_with_index(seed in any::<u64>(), k in 0.0f64..4.0, dk in 0.0f64..2.0) {
                let hat = to_spectral(&field(seed, 2, 5)).unwrap();
                prop_assert!(hat.sobolev_norm(k) <= hat.sobolev_norm(k + dk) * (1.0 + 1e-14));
            }
        }
    }
}
