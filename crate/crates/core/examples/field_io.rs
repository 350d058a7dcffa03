//! Writing and reading fields in the binary and text exchange formats.

use transport_hjb::io::{load, save, FieldData};
use transport_hjb::spectral::{to_spectral, SpatialField, TorusGrid};

fn main() -> transport_hjb::Result<()> {
    let grid = TorusGrid::new(2, 16)?;
    let u = SpatialField::from_fn(grid, |x| x[0].sin() * x[1].cos() + 0.25);
    let dir = std::env::temp_dir().join("hjb-field-io");
    std::fs::create_dir_all(&dir)?;

    let text = dir.join("u.txt");
    save(&FieldData::Physical(u.clone()), Some("example"), &text)?;
    let bin = dir.join("u_hat.bin");
    save(&FieldData::Spectral(to_spectral(&u)?), None, &bin)?;

    let back = load(&text)?.into_physical();
    println!("text round trip exact      {}", back == u);
    let back = load(&bin)?.into_physical();
    println!("binary round trip max err  {:.2e}", back.sub(&u)?.values().iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let header = std::fs::read_to_string(&text)?.lines().next().unwrap_or_default().to_string();
    println!("text header                {header}");
    Ok(())
}
