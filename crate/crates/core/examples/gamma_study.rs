//! Vanishing hyper-viscosity: runs at decreasing γ approach the γ = 0 solution.

use transport_hjb::integrators::SolverConfig;
use transport_hjb::noise::sample_path;
use transport_hjb::oracles::gamma_convergence_study;
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), TransportOperator::gradient_noise(grid, 0.04)?);
    cfg.sample_every = 50;
    let path = sample_path(6, 1, cfg.dt, cfg.steps())?;
    let study = gamma_convergence_study(&cfg, &[1e-8, 1e-9, 1e-10], &path, 2.0)?;
    for r in &study.rows {
        println!(
            "γ = {:.0e} → {:.0e}   H2 diff {:.3e}   vs γ = 0 {:.3e}",
            r.gamma, r.next_gamma, r.diff_next, r.diff_zero
        );
    }
    println!("monotone: consecutive {}, against zero {}", study.monotone_next, study.monotone_zero);
    Ok(())
}
