//! Pathwise uniqueness: two runs from nearby data on one path stay within the
//! stochastic Gronwall envelope.

use transport_hjb::integrators::SolverConfig;
use transport_hjb::oracles::uniqueness_experiment;
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let op = TransportOperator::constant(grid, &[-0.2], &[0.05])?;
    let cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), op);

    let twin = uniqueness_experiment(&cfg, 0, 0.0)?;
    println!("delta = 0: bit-identical = {}", twin.bit_identical);
    let rep = uniqueness_experiment(&cfg, 0, 1e-6)?;
    for s in rep.samples.iter().step_by(rep.samples.len() / 5) {
        println!("t = {:.3}  gap² {:.3e}  envelope {:.3e}", s.t, s.gap_sq, s.envelope);
    }
    println!("worst gap²/envelope {:.3}, pass = {}", rep.worst_ratio, rep.pass);
    Ok(())
}
