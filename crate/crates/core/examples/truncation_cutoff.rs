//! The smooth cut-off θ_r, the stopping level r/C and a truncated run that halts there.

use transport_hjb::integrators::{integrate, SolverConfig, Termination, Truncation};
use transport_hjb::noise::sample_path;
use transport_hjb::spectral::{to_spectral, SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;
use transport_hjb::truncation::CutoffSpec;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let unit = CutoffSpec::new(2.0, &grid, 3.0)?;
    for x in [1.5, 2.25, 2.5, 2.75, 3.5] {
        println!("theta_2({x:.2}) = {:.4}", unit.theta(x)?);
    }

    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let hk0 = to_spectral(&u0)?.sobolev_norm(3.0);
    // stopping level 20% above the initial H^3 norm
    let cutoff = CutoffSpec::new(1.2 * hk0 * unit.sobolev_constant, &grid, 3.0)?;
    println!(
        "C = {:.3}, r = {:.3}, ||u0||_H3 = {hk0:.3}, stopping level r/C = {:.3}",
        cutoff.sobolev_constant,
        cutoff.r,
        cutoff.stopping_level()
    );

    let forcing = SpatialField::from_fn(grid, |x| -3.0 * x[0].cos());
    let mut cfg = SolverConfig::desk(u0, forcing, TransportOperator::gradient_noise(grid, 0.04)?);
    cfg.truncation = Truncation::On { cutoff, halt_at_stopping: true };
    let traj = integrate(&cfg, &sample_path(0, 1, cfg.dt, cfg.steps())?)?;
    match traj.termination {
        Termination::Stopped { time } => println!("halted at the stopping time t = {time:.4}"),
        other => println!("termination: {other:?}, stopping event {:?}", traj.stopping),
    }
    Ok(())
}
