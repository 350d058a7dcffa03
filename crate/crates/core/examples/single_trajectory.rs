//! One stochastic trajectory with the exponential Euler-Maruyama scheme.

use transport_hjb::integrators::{integrate, SolverConfig};
use transport_hjb::noise::sample_path;
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let op = TransportOperator::single_mode_sine(grid, -0.2, 0.1, 0.05)?;
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), op);
    cfg.sample_every = 500;
    let audit = cfg.validate()?;
    println!("{} steps, stability budget {:.3}", audit.steps, audit.stability_budget);

    let traj = integrate(&cfg, &sample_path(42, 1, cfg.dt, cfg.steps())?)?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "t", "L2", "H3", "grad_sup", "mean");
    for d in &traj.diagnostics {
        println!("{:>6.3} {:>10.5} {:>10.5} {:>10.5} {:>10.5}", d.t, d.l2, d.hk, d.grad_sup, d.mean_mode);
    }
    println!("termination: {:?}", traj.termination);
    Ok(())
}
