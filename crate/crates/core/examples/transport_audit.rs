//! Transport operators: Stratonovich correction, constant-coefficient detection and
//! the audit of `Σ⟨𝓛_i² u + (𝓛_i u)², u⟩ ≤ C_ab ||u||²` on random smooth triples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use transport_hjb::sampling::random_smooth_field;
use transport_hjb::spectral::{sup_norm, SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;

    let op = TransportOperator::constant(grid, &[-0.2], &[0.05])?;
    let tag = op.detect_special_class();
    println!("constant coefficients      special = {}, c = {:?}", tag.is_special, tag.c);

    let u = SpatialField::from_fn(grid, |x| x[0].sin());
    let corr = op.strat_correction(&u)?;
    // ½(a∂ + b)² sin = ½(-a² sin + 2ab cos + b² sin)
    let exact = SpatialField::from_fn(grid, |x| {
        0.5 * (-0.04 * x[0].sin() + 2.0 * -0.2 * 0.05 * x[0].cos() + 0.0025 * x[0].sin())
    });
    println!("Stratonovich correction    error {:.2e}", sup_norm(&corr.sub(&exact)?));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = random_smooth_field(grid, 6, 0.5, &mut rng);
        let b = random_smooth_field(grid, 6, 0.5, &mut rng);
        let u = random_smooth_field(grid, 12, 1.0, &mut rng);
        let diag = TransportOperator::new(vec![a], vec![b])?.operator_bound_diag(&u)?;
        assert!(diag.holds());
        worst = worst.max(diag.s / diag.bound);
    }
    println!("operator bound audit       20 triples, max s/bound = {worst:.3}");
    Ok(())
}
