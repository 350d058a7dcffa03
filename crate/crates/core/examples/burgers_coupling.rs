//! With constant coefficients, v = ∇u solves a stochastic viscous Burgers system.

use transport_hjb::integrators::{integrate, Scheme, SolverConfig};
use transport_hjb::noise::sample_path;
use transport_hjb::oracles::burgers_companion;
use transport_hjb::spectral::{gradient, to_spectral, SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let op = TransportOperator::constant(grid, &[-0.2], &[0.05])?;
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), op);
    cfg.scheme = Scheme::StratHeun;
    cfg.horizon = 0.2;
    cfg.snapshot_every = 400;
    let path = sample_path(10, 1, cfg.dt, cfg.steps())?;
    let hjb = integrate(&cfg, &path)?;
    let burgers = burgers_companion(&cfg, &path)?;
    for ((t, u), (_, v)) in hjb.snapshots.iter().zip(&burgers.snapshots) {
        let du = &gradient(&to_spectral(u)?)[0];
        println!("t = {t:.3}   ||∇u - v||_L2 = {:.3e}", du.sub(&v[0])?.l2_norm());
    }
    Ok(())
}
