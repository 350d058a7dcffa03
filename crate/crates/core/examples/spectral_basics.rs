//! Fourier transforms, derivatives, Sobolev norms and 2/3 dealiasing on the torus.

use transport_hjb::spectral::{sobolev_norm, sup_norm, to_physical, to_spectral, SpatialField, TorusGrid};

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(1, 64)?;
    let u = SpatialField::from_fn(grid, |x| (3.0 * x[0]).sin() + 0.5 * (25.0 * x[0]).cos());
    let hat = to_spectral(&u)?;

    let du = to_physical(&hat.derivative(0)?);
    let exact = SpatialField::from_fn(grid, |x| 3.0 * (3.0 * x[0]).cos() - 12.5 * (25.0 * x[0]).sin());
    println!("spectral derivative error  {:.2e}", sup_norm(&du.sub(&exact)?));

    for k in [0.0, 1.0, 3.0] {
        println!("||u||_H^{k}                {:.6}", sobolev_norm(&u, k)?);
    }

    // mode 25 exceeds N/3 and is removed
    let kept = to_physical(&hat.dealias());
    let low = SpatialField::from_fn(grid, |x| (3.0 * x[0]).sin());
    println!("dealias limit              {}", grid.dealias_limit());
    println!("dealiased minus low mode   {:.2e}", sup_norm(&kept.sub(&low)?));
    Ok(())
}
