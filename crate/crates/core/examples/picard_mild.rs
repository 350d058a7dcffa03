//! Picard iteration of the mild formulation (γ > 0) against the time stepper.

use transport_hjb::integrators::{integrate, SolverConfig};
use transport_hjb::mild::{fixed_point_solve, MildProblem};
use transport_hjb::noise::sample_path;
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), TransportOperator::gradient_noise(grid, 0.04)?);
    cfg.gamma = 1e-9;
    cfg.horizon = 0.05;
    let path = sample_path(7, 1, cfg.dt, cfg.steps())?;

    let sol = fixed_point_solve(&MildProblem::new(cfg.clone(), &path)?, 1e-10, 100)?;
    for (j, inc) in sol.increments.iter().enumerate() {
        println!("iteration {:>2}   sup_t ||Δu||_H3 = {inc:.3e}", j + 1);
    }

    cfg.snapshot_every = 1;
    let traj = integrate(&cfg, &path)?;
    let mut gap: f64 = 0.0;
    for (m, (_, u)) in traj.snapshots.iter().enumerate() {
        gap = gap.max(u.sub(&sol.field_at(m))?.l2_norm());
    }
    println!("max ratio {:.3}, residual {:.2e}, sup_t L2 gap to stepper {gap:.2e}", sol.max_ratio(), sol.residual);
    Ok(())
}
