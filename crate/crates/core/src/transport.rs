//! First-order transport operators `𝓛_i u = a_i ∂_i u + b_i u`, one per axis.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::spectral::{to_physical, to_spectral, SpatialField, SpectralField, TorusGrid};

#[derive(Clone, Debug)]
enum Coefficient {
    Constant(f64),
    Field(SpatialField),
}

impl Coefficient {
    fn new(f: &SpatialField) -> Self {
        let first = f.values()[0];
        if f.values().iter().all(|&v| v == first) {
            Coefficient::Constant(first)
        } else {
            Coefficient::Field(f.clone())
        }
    }

    /// Dealiased `coefficient · g`, in spectral space.
    fn times(&self, g: &SpectralField) -> Result<SpectralField> {
        match self {
            Coefficient::Constant(c) => Ok(g.scale(*c)),
            Coefficient::Field(a) => {
                let p = a.zip(&to_physical(g), |x, y| x * y)?;
                Ok(to_spectral(&p)?.dealias())
            }
        }
    }
}

/// The coefficient family `{a_i, b_i}` with `i` ranging over the axes.
#[derive(Clone, Debug)]
pub struct TransportOperator {
    grid: TorusGrid,
    a: Vec<SpatialField>,
    b: Vec<SpatialField>,
    a_coef: Vec<Coefficient>,
    b_coef: Vec<Coefficient>,
}

/// Sobolev `W^{m,∞}` norms of every coefficient.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessBudget {
    pub order: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Result of the special-class detection (`∇a_i` and `b_i` constant).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialClassTag {
    pub is_special: bool,
    /// `c_i = ∂_i a_i + b_i`; empty when the operator is not in the class.
    pub c: Vec<f64>,
}

/// Audit values for `Σ_i ⟨𝓛_i² u, u⟩ + ⟨𝓛_i u, 𝓛_i u⟩ ≤ C_ab ‖u‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorBound {
    pub s: f64,
    pub bound: f64,
    pub c_ab: f64,
}

impl OperatorBound {
    /// `s ≤ bound`, allowing relative round-off of `1e-12` for the equality cases.
    pub fn holds(&self) -> bool {
        self.s <= self.bound * (1.0 + 1e-12) + 1e-300
    }
}

const SPECIAL_TOL: f64 = 1e-10;

impl TransportOperator {
    pub fn new(a: Vec<SpatialField>, b: Vec<SpatialField>) -> Result<Self> {
        let grid = a
            .first()
            .map(|f| f.grid())
            .ok_or_else(|| invalid("a", "need one coefficient per axis"))?;
        if a.len() != grid.dim() || b.len() != grid.dim() {
            return Err(invalid(
                "a/b",
                format!(
                    "need {} coefficients each, got {} and {}",
                    grid.dim(),
                    a.len(),
                    b.len()
                ),
            ));
        }
        for f in a.iter().chain(&b) {
            grid.check_same(&f.grid())?;
            if !f.is_finite() {
                return Err(invalid("a/b", "coefficients must be finite"));
            }
        }
        let a_coef = a.iter().map(Coefficient::new).collect();
        let b_coef = b.iter().map(Coefficient::new).collect();
        Ok(Self {
            grid,
            a,
            b,
            a_coef,
            b_coef,
        })
    }

    /// `𝓛_i ≡ 0`: the deterministic equation.
    pub fn zero(grid: TorusGrid) -> Self {
        Self::constant(grid, &vec![0.0; grid.dim()], &vec![0.0; grid.dim()])
            .expect("matching lengths")
    }

    pub fn constant(grid: TorusGrid, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != grid.dim() || b.len() != grid.dim() {
            return Err(invalid("a/b", "one constant per axis"));
        }
        Self::new(
            a.iter().map(|&c| SpatialField::constant(grid, c)).collect(),
            b.iter().map(|&c| SpatialField::constant(grid, c)).collect(),
        )
    }

    /// `𝓛_i = -√ν ∂_i` on every axis.
    pub fn gradient_noise(grid: TorusGrid, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) {
            return Err(invalid("nu", format!("must be >= 0, got {nu}")));
        }
        let a = -nu.sqrt();
        Self::constant(grid, &vec![a; grid.dim()], &vec![0.0; grid.dim()])
    }

    /// `a_i = a0 + amplitude·sin(x_i)`, `b_i = b0`.
    pub fn single_mode_sine(grid: TorusGrid, a0: f64, amplitude: f64, b0: f64) -> Result<Self> {
        Self::new(
            (0..grid.dim())
                .map(|i| SpatialField::from_fn(grid, |x| a0 + amplitude * x[i].sin()))
                .collect(),
            vec![SpatialField::constant(grid, b0); grid.dim()],
        )
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn a(&self) -> &[SpatialField] {
        &self.a
    }

    pub fn b(&self) -> &[SpatialField] {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a_coef
            .iter()
            .chain(&self.b_coef)
            .all(|c| matches!(c, Coefficient::Constant(v) if *v == 0.0))
    }

    fn check_axis(&self, i: usize) -> Result<()> {
        if i < self.grid.dim() {
            Ok(())
        } else {
            Err(invalid("i", format!("operator index {i} out of range")))
        }
    }

    /// `𝓛_i u` on spectral data.
    pub fn apply_l_spectral(&self, i: usize, u: &SpectralField) -> Result<SpectralField> {
        self.check_axis(i)?;
        self.grid.check_same(&u.grid())?;
        let transport = self.a_coef[i].times(&u.derivative(i)?)?;
        let reaction = self.b_coef[i].times(u)?;
        transport.add(&reaction)
    }

    pub fn apply_l(&self, i: usize, u: &SpatialField) -> Result<SpatialField> {
        self.grid.check_same(&u.grid())?;
        Ok(to_physical(&self.apply_l_spectral(i, &to_spectral(u)?)?))
    }

    /// `𝓛_i^* φ = -∂_i(a_i φ) + b_i φ`.
    pub fn apply_l_adjoint(&self, i: usize, phi: &SpatialField) -> Result<SpatialField> {
        self.check_axis(i)?;
        self.grid.check_same(&phi.grid())?;
        let p = to_spectral(phi)?;
        let flux = self.a_coef[i].times(&p)?.derivative(i)?;
        let out = self.b_coef[i].times(&p)?.sub(&flux)?;
        Ok(to_physical(&out))
    }

    /// `½ Σ_i 𝓛_i(𝓛_i u)`, the Stratonovich-to-Itô drift correction.
    pub fn strat_correction_spectral(&self, u: &SpectralField) -> Result<SpectralField> {
        let mut acc = SpectralField::zeros(self.grid);
        for i in 0..self.grid.dim() {
            let once = self.apply_l_spectral(i, u)?;
            acc.axpy(0.5, &self.apply_l_spectral(i, &once)?)?;
        }
        Ok(acc)
    }

    pub fn strat_correction(&self, u: &SpatialField) -> Result<SpatialField> {
        self.grid.check_same(&u.grid())?;
        Ok(to_physical(&self.strat_correction_spectral(&to_spectral(u)?)?))
    }

    pub fn smoothness(&self, order: usize) -> Result<SmoothnessBudget> {
        Ok(SmoothnessBudget {
            order,
            a: self.a.iter().map(|f| w_inf_norm(f, order)).collect::<Result<_>>()?,
            b: self.b.iter().map(|f| w_inf_norm(f, order)).collect::<Result<_>>()?,
        })
    }

    /// `C_ab = 2 Σ_i (‖a_i‖_{W^{2,∞}} + ‖b_i‖_{W^{1,∞}})²`.
    ///
    /// Integrating by parts along axis `i`,
    /// `⟨𝓛_i² u, u⟩ + ⟨𝓛_i u, 𝓛_i u⟩ = ⟨𝓛_i u, (𝓛_i + 𝓛_i^*) u⟩ = ⟨q_i, u²⟩` with
    /// `q_i = 2b² - 2b ∂a + ½(∂a)² - a ∂b + ½ a ∂²a` (subscripts dropped). Each term is
    /// bounded by a product of the two norms above, and the five coefficients
    /// `2, 2, ½, 1, ½` fit under `2(A + B)² = 2A² + 4AB + 2B²`.
    pub fn bound_constant(&self) -> Result<f64> {
        let w2 = self.smoothness(2)?;
        let w1 = self.smoothness(1)?;
        Ok(2.0
            * w2
                .a
                .iter()
                .zip(&w1.b)
                .map(|(a, b)| (a + b).powi(2))
                .sum::<f64>())
    }

    pub fn operator_bound_diag(&self, u: &SpatialField) -> Result<OperatorBound> {
        self.grid.check_same(&u.grid())?;
        let uh = to_spectral(u)?;
        let mut s = 0.0;
        for i in 0..self.grid.dim() {
            let lu = to_physical(&self.apply_l_spectral(i, &uh)?);
            let llu = self.apply_l(i, &lu)?;
            s += llu.inner(u)? + lu.inner(&lu)?;
        }
        let c_ab = self.bound_constant()?;
        Ok(OperatorBound {
            s,
            bound: c_ab * u.inner(u)?,
            c_ab,
        })
    }

    pub fn detect_special_class(&self) -> SpecialClassTag {
        let mut c = Vec::with_capacity(self.grid.dim());
        for i in 0..self.grid.dim() {
            let grad_a = match &self.a_coef[i] {
                Coefficient::Constant(_) => 0.0,
                Coefficient::Field(a) => crate::spectral::grad_sup_norm(a).unwrap_or(f64::INFINITY),
            };
            let b = &self.b[i];
            if grad_a > SPECIAL_TOL || b.max() - b.min() > SPECIAL_TOL {
                return SpecialClassTag {
                    is_special: false,
                    c: Vec::new(),
                };
            }
            // a periodic coefficient with constant gradient has zero gradient
            c.push(b.mean());
        }
        SpecialClassTag {
            is_special: true,
            c,
        }
    }
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                let used: usize = prefix.iter().sum();
                (0..=max_order - used).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

/// `‖f‖_{W^{m,∞}} = Σ_{|α| ≤ m} ‖∂^α f‖_∞`, derivatives taken spectrally.
pub fn w_inf_norm(f: &SpatialField, order: usize) -> Result<f64> {
    let fh = to_spectral(f)?;
    multi_indices(f.grid().dim(), order)
        .iter()
        .map(|alpha| Ok(crate::spectral::sup_norm(&to_physical(&fh.multi_derivative(alpha)?))))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::sup_norm;
    use crate::sampling::random_smooth_field;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g128() -> TorusGrid {
        TorusGrid::new(1, 128).unwrap()
    }

    #[test]
    fn unit_transport_is_derivative() {
        let g = g128();
        let op = TransportOperator::constant(g, &[1.0], &[0.0]).unwrap();
        let u = SpatialField::from_fn(g, |x| x[0].sin());
        let cos = SpatialField::from_fn(g, |x| x[0].cos());
        assert!(sup_norm(&op.apply_l(0, &u).unwrap().sub(&cos).unwrap()) < 1e-13);
        assert!(op.apply_l(1, &u).is_err());
    }

    #[test]
    fn pure_reaction_is_identity() {
        let g = g128();
        let op = TransportOperator::constant(g, &[0.0], &[1.0]).unwrap();
        let u = SpatialField::from_fn(g, |x| (x[0]).cos() + 0.2 * (3.0 * x[0]).sin());
        assert!(sup_norm(&op.apply_l(0, &u).unwrap().sub(&u).unwrap()) < 1e-15);
    }

    #[test]
    fn variable_coefficient_product() {
        let g = g128();
        let op = TransportOperator::single_mode_sine(g, 0.0, 1.0, 0.0).unwrap();
        let u = SpatialField::from_fn(g, |x| x[0].sin());
        let exact = SpatialField::from_fn(g, |x| x[0].sin() * x[0].cos());
        assert!(sup_norm(&op.apply_l(0, &u).unwrap().sub(&exact).unwrap()) <= 1e-10);
    }

    #[test]
    fn adjoint_special_cases() {
        let g = g128();
        let phi = SpatialField::from_fn(g, |x| (2.0 * x[0]).sin());
        let skew = TransportOperator::constant(g, &[1.0], &[0.0]).unwrap();
        let dphi = SpatialField::from_fn(g, |x| 2.0 * (2.0 * x[0]).cos());
        assert!(sup_norm(&skew.apply_l_adjoint(0, &phi).unwrap().add(&dphi).unwrap()) < 1e-13);
        let mult = TransportOperator::constant(g, &[0.0], &[0.7]).unwrap();
        assert!(sup_norm(&mult.apply_l_adjoint(0, &phi).unwrap().sub(&phi.scale(0.7)).unwrap()) < 1e-15);
    }

    #[test]
    fn adjoint_duality_on_random_fields() {
        let g = TorusGrid::new(1, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_smooth_field(g, 4, 1.0, &mut rng);
            let b = random_smooth_field(g, 4, 1.0, &mut rng);
            let u = random_smooth_field(g, 8, 1.0, &mut rng);
            let phi = random_smooth_field(g, 8, 1.0, &mut rng);
            let op = TransportOperator::new(vec![a], vec![b]).unwrap();
            let lhs = op.apply_l(0, &u).unwrap().inner(&phi).unwrap();
            let rhs = u.inner(&op.apply_l_adjoint(0, &phi).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }

    #[test]
    fn correction_unit_transport_is_half_laplacian() {
        let g = g128();
        let op = TransportOperator::constant(g, &[1.0], &[0.0]).unwrap();
        let u = SpatialField::from_fn(g, |x| x[0].sin());
        let c = op.strat_correction(&u).unwrap();
        assert!(sup_norm(&c.add(&u.scale(0.5)).unwrap()) < 1e-12);

        let op = TransportOperator::constant(g, &[0.0], &[0.3]).unwrap();
        let c = op.strat_correction(&u).unwrap();
        assert!(sup_norm(&c.sub(&u.scale(0.5 * 0.09)).unwrap()) < 1e-15);
    }

    #[test]
    fn correction_matches_symbolic_expansion() {
        // a = sin, b = 0, u = sin: ½ sin·∂(sin·cos) = ½ sin·cos(2x)
        let g = g128();
        let op = TransportOperator::single_mode_sine(g, 0.0, 1.0, 0.0).unwrap();
        let u = SpatialField::from_fn(g, |x| x[0].sin());
        let exact = SpatialField::from_fn(g, |x| 0.5 * x[0].sin() * (2.0 * x[0]).cos());
        assert!(sup_norm(&op.strat_correction(&u).unwrap().sub(&exact).unwrap()) <= 1e-9);
    }

    #[test]
    fn operator_bound_cases() {
        let g = g128();
        let u = SpatialField::from_fn(g, |x| x[0].sin() + 0.3 * (5.0 * x[0]).cos());
        let skew = TransportOperator::constant(g, &[1.0], &[0.0]).unwrap();
        assert!(skew.operator_bound_diag(&u).unwrap().s.abs() <= 1e-10);

        let b = 0.8;
        let reaction = TransportOperator::constant(g, &[0.0], &[b]).unwrap();
        let d = reaction.operator_bound_diag(&u).unwrap();
        let u2 = u.inner(&u).unwrap();
        assert!((d.s - 2.0 * b * b * u2).abs() <= 1e-12 * d.s);
        assert!(d.c_ab >= 2.0 * b * b);
        assert!(d.holds());
    }

    #[test]
    fn linearity() {
        let g = TorusGrid::new(1, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = TransportOperator::new(
            vec![random_smooth_field(g, 3, 1.0, &mut rng)],
            vec![random_smooth_field(g, 3, 1.0, &mut rng)],
        )
        .unwrap();
        let u = random_smooth_field(g, 6, 1.0, &mut rng);
        let v = random_smooth_field(g, 6, 1.0, &mut rng);
        let lhs = op.apply_l(0, &u.scale(2.0).add(&v.scale(-0.5)).unwrap()).unwrap();
        let rhs = op
            .apply_l(0, &u)
            .unwrap()
            .scale(2.0)
            .add(&op.apply_l(0, &v).unwrap().scale(-0.5))
            .unwrap();
        assert!(sup_norm(&lhs.sub(&rhs).unwrap()) < 1e-12);
    }

    #[test]
    fn special_class_detection() {
        let g = g128();
        let tag = TransportOperator::constant(g, &[2.0], &[1.0]).unwrap().detect_special_class();
        assert!(tag.is_special);
        assert_eq!(tag.c, vec![1.0]);
        let tag = TransportOperator::single_mode_sine(g, 0.0, 1.0, 0.0).unwrap().detect_special_class();
        assert!(!tag.is_special);
        let tag = TransportOperator::gradient_noise(g, 0.04).unwrap().detect_special_class();
        assert!(tag.is_special);
        assert_eq!(tag.c, vec![0.0]);
    }

    #[test]
    fn w_norms_of_sine() {
        let g = g128();
        let f = SpatialField::from_fn(g, |x| 0.5 * (2.0 * x[0]).sin());
        // 0.5 + 1 + 2
        assert!((w_inf_norm(&f, 2).unwrap() - 3.5).abs() < 1e-12);
        assert_eq!(multi_indices(2, 2).len(), 6);
    }

    mod properties {
        use super::*;
        use crate::sampling::random_smooth_field;
        use proptest::prelude::*;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn bound_and_duality_hold_for_random_triples(seed in any::<u64>(), amp in 0.01f64..2.0) {
                let g = TorusGrid::new(1, 128).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_smooth_field(g, 6, amp, &mut rng);
                let b = random_smooth_field(g, 6, amp, &mut rng);
                let u = random_smooth_field(g, 12, 1.0, &mut rng);
                let phi = random_smooth_field(g, 12, 1.0, &mut rng);
                let op = TransportOperator::new(vec![a], vec![b]).unwrap();
                prop_assert!(op.operator_bound_diag(&u).unwrap().holds());
                let lhs = op.apply_l(0, &u).unwrap().inner(&phi).unwrap();
                let rhs = u.inner(&op.apply_l_adjoint(0, &phi).unwrap()).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            }
        }
    }
}
