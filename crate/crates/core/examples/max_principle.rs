//! The sup norm of ∇u does not grow under constant transport coefficients and ∂V ≤ 0.

use transport_hjb::integrators::{integrate, Scheme, SolverConfig};
use transport_hjb::noise::sample_path;
use transport_hjb::oracles::{default_max_principle_tol, max_principle_check};
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let op = TransportOperator::constant(grid, &[-0.2], &[0.0])?;
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), op);
    cfg.scheme = Scheme::StratHeun;
    let tol = default_max_principle_tol(cfg.dt, 128, 3.0);
    for seed in 0..4 {
        let traj = integrate(&cfg, &sample_path(seed, 1, cfg.dt, cfg.steps())?)?;
        let rep = max_principle_check(&cfg, &traj, tol)?;
        println!(
            "seed {seed}: ||∇u0||_∞ = {:.4}, worst margin {:+.2e} (tol {tol:.1e}), pass = {}",
            rep.initial, rep.worst_margin, rep.pass
        );
    }
    Ok(())
}
