//! Field snapshot formats.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size  content
//! 0       4     magic "TFLD"
//! 4       1     format version (1)
//! 5       1     representation tag: 0 = physical, 1 = spectral
//! 6       4     dimension n (u32)
//! 10      4     points per axis N (u32)
//! 14      ...   N^n f64 values in row-major order (physical), or
//!               N^n (re, im) f64 pairs in FFT storage order (spectral)
//! ```
//!
//! Text exchange format: one header comment line
//! `# torus-field v1 dim=<n> points=<N> repr=<physical|spectral> [config_hash=<hex>]`
//! followed by one value per line (`re im` for spectral data). Values are
//! printed in shortest round-trip form, so reading back is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{SpatialField, SpectralField, TorusGrid};

const MAGIC: &[u8; 4] = b"TFLD";
const VERSION: u8 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum FieldData {
    Physical(SpatialField),
    Spectral(SpectralField),
}

impl FieldData {
    pub fn grid(&self) -> TorusGrid {
        match self {
            FieldData::Physical(f) => f.grid(),
            FieldData::Spectral(f) => f.grid(),
        }
    }

    fn tag(&self) -> u8 {
        match self {
            FieldData::Physical(_) => 0,
            FieldData::Spectral(_) => 1,
        }
    }

    fn repr_name(&self) -> &'static str {
        match self {
            FieldData::Physical(_) => "physical",
            FieldData::Spectral(_) => "spectral",
        }
    }

    pub fn into_physical(self) -> SpatialField {
        match self {
            FieldData::Physical(f) => f,
            FieldData::Spectral(s) => crate::spectral::to_physical(&s),
        }
    }
}

pub fn write_binary<W: Write>(field: &FieldData, mut w: W) -> Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, field.tag()])?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    w.write_all(&(grid.points() as u32).to_le_bytes())?;
    match field {
        FieldData::Physical(f) => {
            for v in f.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        FieldData::Spectral(s) => {
            for c in s.coefficients() {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<FieldData> {
    let mut head = [0u8; 6];
    r.read_exact(&mut head)?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if head[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", head[4])));
    }
    let tag = head[5];
    let dim = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let grid = TorusGrid::new(dim, points)?;
    let field = match tag {
        0 => {
            let values = (0..grid.len())
                .map(|_| read_f64(&mut r))
                .collect::<Result<Vec<_>>>()?;
            FieldData::Physical(SpatialField::new(grid, values)?)
        }
        1 => {
            let coeffs = (0..grid.len())
                .map(|_| Ok(Complex64::new(read_f64(&mut r)?, read_f64(&mut r)?)))
                .collect::<Result<Vec<_>>>()?;
            FieldData::Spectral(SpectralField::from_coefficients(grid, coeffs)?)
        }
        t => return Err(Error::Format(format!("unknown representation tag {t}"))),
    };
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after field payload".into()));
    }
    Ok(field)
}

/// Metadata carried by the text header.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TextHeader {
    pub config_hash: Option<String>,
}

pub fn write_text<W: Write>(field: &FieldData, config_hash: Option<&str>, mut w: W) -> Result<()> {
    let grid = field.grid();
    write!(
        w,
        "# torus-field v1 dim={} points={} repr={}",
        grid.dim(),
        grid.points(),
        field.repr_name()
    )?;
    if let Some(h) = config_hash {
        write!(w, " config_hash={h}")?;
    }
    writeln!(w)?;
    match field {
        FieldData::Physical(f) => {
            for v in f.values() {
                writeln!(w, "{v:?}")?;
            }
        }
        FieldData::Spectral(s) => {
            for c in s.coefficients() {
                writeln!(w, "{:?} {:?}", c.re, c.im)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse `{tok}`")))
}

pub fn read_text<R: Read>(r: R) -> Result<(FieldData, TextHeader)> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("#") || toks.next() != Some("torus-field") || toks.next() != Some("v1") {
        return Err(Error::Format("missing `# torus-field v1` header".into()));
    }
    let (mut dim, mut points, mut repr, mut meta) = (None, None, None, TextHeader::default());
    for t in toks {
        let (key, val) = t
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token `{t}`")))?;
        match key {
            "dim" => dim = val.parse::<usize>().ok(),
            "points" => points = val.parse::<usize>().ok(),
            "repr" => repr = Some(val.to_string()),
            "config_hash" => meta.config_hash = Some(val.to_string()),
            other => return Err(Error::Format(format!("unknown header key `{other}`"))),
        }
    }
    let grid = TorusGrid::new(
        dim.ok_or_else(|| Error::Format("header lacks dim".into()))?,
        points.ok_or_else(|| Error::Format("header lacks points".into()))?,
    )?;
    let body: Vec<(usize, String)> = lines
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 2, l)))
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, l)| !l.trim().is_empty())
        .collect();
    if body.len() != grid.len() {
        return Err(Error::Format(format!(
            "expected {} value lines, found {}",
            grid.len(),
            body.len()
        )));
    }
    let field = match repr.as_deref() {
        Some("physical") => {
            let values = body
                .iter()
                .map(|(n, l)| parse_f64(l.trim(), *n))
                .collect::<Result<Vec<_>>>()?;
            FieldData::Physical(SpatialField::new(grid, values)?)
        }
        Some("spectral") => {
            let coeffs = body
                .iter()
                .map(|(n, l)| {
                    let mut it = l.split_whitespace();
                    match (it.next(), it.next(), it.next()) {
                        (Some(a), Some(b), None) => {
                            Ok(Complex64::new(parse_f64(a, *n)?, parse_f64(b, *n)?))
                        }
                        _ => Err(Error::Format(format!("line {n}: expected `re im`"))),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            FieldData::Spectral(SpectralField::from_coefficients(grid, coeffs)?)
        }
        other => return Err(Error::Format(format!("unknown repr {other:?}"))),
    };
    Ok((field, meta))
}

/// Writes a field, choosing the binary layout for `.bin` paths and the text format otherwise.
pub fn save(field: &FieldData, config_hash: Option<&str>, path: &Path) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    if path.extension().is_some_and(|e| e == "bin") {
        write_binary(field, w)
    } else {
        write_text(field, config_hash, w)
    }
}

pub fn load(path: &Path) -> Result<FieldData> {
    let r = BufReader::new(File::open(path)?);
    if path.extension().is_some_and(|e| e == "bin") {
        read_binary(r)
    } else {
        Ok(read_text(r)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::to_spectral;
    use proptest::prelude::*;

    fn field_from(values: Vec<f64>) -> SpatialField {
        SpatialField::new(TorusGrid::new(1, 16).unwrap(), values).unwrap()
    }

    proptest! {
        #[test]
        fn binary_and_text_round_trip_bit_exact(values in prop::collection::vec(-1e6f64..1e6, 16)) {
            let f = field_from(values);
            for data in [FieldData::Physical(f.clone()), FieldData::Spectral(to_spectral(&f).unwrap())] {
                let mut buf = Vec::new();
                write_binary(&data, &mut buf).unwrap();
                let back = read_binary(&buf[..]).unwrap();
                prop_assert_eq!(&back, &data);

                let mut txt = Vec::new();
                write_text(&data, Some("abc123"), &mut txt).unwrap();
                let (back, meta) = read_text(&txt[..]).unwrap();
                prop_assert_eq!(&back, &data);
                prop_assert_eq!(meta.config_hash.as_deref(), Some("abc123"));
            }
        }
    }

    #[test]
    fn header_layout() {
        let f = field_from(vec![1.0; 16]);
        let mut buf = Vec::new();
        write_binary(&FieldData::Physical(f), &mut buf).unwrap();
        assert_eq!(&buf[..4], b"TFLD");
        assert_eq!(buf[5], 0);
        assert_eq!(u32::from_le_bytes(buf[6..10].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(buf[10..14].try_into().unwrap()), 16);
        assert_eq!(buf.len(), 14 + 16 * 8);
    }

    #[test]
    fn rejects_truncated_and_malformed() {
        let f = field_from(vec![0.5; 16]);
        let mut buf = Vec::new();
        write_binary(&FieldData::Physical(f.clone()), &mut buf).unwrap();
        assert!(read_binary(&buf[..buf.len() - 3]).is_err());
        let mut extra = buf.clone();
        extra.push(0);
        assert!(read_binary(&extra[..]).is_err());

        let mut txt = Vec::new();
        write_text(&FieldData::Physical(f), None, &mut txt).unwrap();
        let s = String::from_utf8(txt).unwrap();
        let bad = s.replacen("0.5", "zero", 1);
        assert!(read_text(bad.as_bytes()).is_err());
        assert!(read_text("1.0\n".as_bytes()).is_err());
    }
}
