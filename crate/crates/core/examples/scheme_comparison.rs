//! Itô exponential Euler-Maruyama and Stratonovich Heun driven by the same Brownian
//! paths: the mean terminal gap shrinks as the step is refined.

use rayon::prelude::*;

use transport_hjb::integrators::{integrate, Scheme, SolverConfig};
use transport_hjb::noise::sample_path;
use transport_hjb::spectral::{SpatialField, TorusGrid};
use transport_hjb::transport::TransportOperator;

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 128)?;
    let u0 = SpatialField::from_fn(grid, |x| x[0].sin());
    let mut cfg = SolverConfig::desk(u0, SpatialField::zeros(grid), TransportOperator::gradient_noise(grid, 0.04)?);
    cfg.horizon = 0.2;
    let dts = [4e-4, 2e-4, 1e-4];
    let seeds = 32u64;
    let gaps = (0..seeds)
        .into_par_iter()
        .map(|seed| {
            let path = sample_path(seed, 1, 1e-4, 2000)?;
            dts.iter()
                .map(|&dt| {
                    let mut ito = cfg.clone();
                    ito.dt = dt;
                    let mut heun = ito.clone();
                    heun.scheme = Scheme::StratHeun;
                    let a = integrate(&ito, &path)?;
                    let b = integrate(&heun, &path)?;
                    Ok(a.final_state().sub(b.final_state())?.l2_norm())
                })
                .collect::<transport_hjb::Result<Vec<f64>>>()
        })
        .collect::<transport_hjb::Result<Vec<_>>>()?;
    for (j, dt) in dts.iter().enumerate() {
        let mean = gaps.iter().map(|g| g[j]).sum::<f64>() / seeds as f64;
        println!("dt = {dt:.0e}   E||u_ito(T) - u_heun(T)||_L2 = {mean:.3e}   ({seeds} paths)");
    }
    Ok(())
}
