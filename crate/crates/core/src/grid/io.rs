//! Little-endian binary field snapshots.
//!
//! ```text
//! "MPNLSFLD"            8 bytes magic
//! u32 version = 1
//! u32 n                 spatial dimension
//! u32 N × n             points along each axis (all equal)
//! f64 R                 box half-width
//! (f64 re, f64 im) × N^n row-major samples
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Field, SpectralGrid};
use crate::error::{Error, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"MPNLSFLD";
pub const FIELD_VERSION: u32 = 1;

pub fn write_field_to<W: Write>(mut out: W, field: &Field) -> Result<()> {
    let grid = field.grid();
    out.write_all(FIELD_MAGIC)?;
    out.write_all(&FIELD_VERSION.to_le_bytes())?;
    out.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for _ in 0..grid.dim() {
        out.write_all(&(grid.points() as u32).to_le_bytes())?;
    }
    out.write_all(&grid.half_width().to_le_bytes())?;
    for z in field.values() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_field(path: impl AsRef<Path>, field: &Field) -> Result<()> {
    write_field_to(BufWriter::new(File::create(path)?), field)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf).map_err(truncated)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf).map_err(truncated)?;
    Ok(f64::from_le_bytes(buf))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::FileFormat("unexpected end of file".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_field_from<R: Read>(mut input: R) -> Result<Field> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != FIELD_MAGIC {
        return Err(Error::FileFormat("bad magic".into()));
    }
    let version = read_u32(&mut input)?;
    if version != FIELD_VERSION {
        return Err(Error::FileFormat(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut input)? as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::FileFormat(format!("bad dimension {dim}")));
    }
    let points: Vec<u32> = (0..dim).map(|_| read_u32(&mut input)).collect::<Result<_>>()?;
    if points.iter().any(|&p| p != points[0]) {
        return Err(Error::FileFormat(format!("unequal axis lengths {points:?}")));
    }
    let half_width = read_f64(&mut input)?;
    let grid = SpectralGrid::new(dim, points[0] as usize, half_width)
        .map_err(|e| Error::FileFormat(format!("invalid grid: {e}")))?;
    let values = (0..grid.len())
        .map(|_| Ok(Complex64::new(read_f64(&mut input)?, read_f64(&mut input)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::FileFormat("trailing bytes after samples".into()));
    }
    Field::new(grid, values).map_err(|_| Error::FileFormat("non-finite samples".into()))
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    read_field_from(BufReader::new(File::open(path)?))
}
