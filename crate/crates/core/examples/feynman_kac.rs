//! Monte Carlo Feynman-Kac estimate of the noiseless solution with 95% bands.

use transport_hjb::oracles::{cole_hopf_exact, feynman_kac_mc, FeynmanKacSpec};
use transport_hjb::spectral::{SpatialField, TorusGrid};

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let v = SpatialField::from_fn(grid, |x| 0.3 * x[0].cos());
    let (mu, horizon) = (0.1, 0.1);
    let probes = [0usize, 32, 64, 96];
    let xs: Vec<Vec<f64>> = probes.iter().map(|&j| grid.coordinates(j)).collect();
    let est = feynman_kac_mc(&u0, &v, mu, horizon, &xs, &FeynmanKacSpec::new(50_000, 5))?;
    let exact = cole_hopf_exact(&u0, mu, &v, horizon, &[horizon], 1e-4)?;
    for (e, &j) in est.iter().zip(&probes) {
        let reference = exact[0].1.values()[j];
        println!(
            "x = {:.3}  MC {:+.5} ± {:.5}  splitting reference {:+.5}",
            e.x[0], e.u, e.half_width, reference
        );
    }
    Ok(())
}
