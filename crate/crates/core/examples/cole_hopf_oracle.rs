//! Exact references: Cole-Hopf for the noiseless equation and the random
//! translation for gradient noise, each compared with the solver.

use transport_hjb::integrators::{integrate, Scheme, SolverConfig};
use transport_hjb::noise::{sample_path, NoisePath};
use transport_hjb::oracles::{cole_hopf_exact, compare, shift_oracle, OracleMetadata};
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let zero = SpatialField::zeros(grid);

    let mut cfg = SolverConfig::desk(u0.clone(), zero.clone(), TransportOperator::zero(grid));
    cfg.horizon = 0.1;
    cfg.snapshot_every = 250;
    let traj = integrate(&cfg, &NoisePath::silent(1, cfg.dt, cfg.steps()))?;
    let times: Vec<f64> = traj.snapshots.iter().map(|(t, _)| *t).collect();
    let exact = cole_hopf_exact(&u0, cfg.mu, &zero, cfg.horizon, &times, 1e-5)?;
    let meta = OracleMetadata { dt: cfg.dt, points: 128, seed: None };
    let rep = compare("cole_hopf_exact", &traj.snapshots, &exact, 2.0, 1e-4, meta)?;
    for r in &rep.rows {
        println!("Cole-Hopf  t = {:.3}  Linf {:.2e}  H2 {:.2e}", r.t, r.linf, r.h_beta);
    }

    let nu = 0.04;
    cfg.operator = TransportOperator::gradient_noise(grid, nu)?;
    cfg.scheme = Scheme::StratHeun;
    let path = sample_path(2024, 1, cfg.dt, cfg.steps())?;
    let traj = integrate(&cfg, &path)?;
    let exact = shift_oracle(&u0, cfg.mu, nu, &path, cfg.horizon, &times)?;
    let rep = compare("shift_oracle", &traj.snapshots, &exact, 2.0, 5e-3, OracleMetadata { seed: Some(2024), ..meta })?;
    println!("shift oracle max Linf {:.2e}, pass = {}", rep.max_linf, rep.pass);
    Ok(())
}
