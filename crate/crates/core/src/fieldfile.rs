//! Binary dump of space-time fields.
//!
//! Layout (all integers and floats little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `SMXF` |
//! | 4     | endian marker `0x0A0B0C0D` |
//! | 4     | version (1) |
//! | 4     | number of components |
//! | 4     | number of axes (3) |
//! | 3×8   | axis lengths `nt + 1, ny, nx` |
//! | 3×8   | `lx, ly, T` |
//! | rest  | `f64` data, component-major, then row-major `(t, y, x)` |

use std::io::{Read, Write};

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpaceTimeField};
use crate::scalar::{lit, to_f64, Real};

pub const MAGIC: &[u8; 4] = b"SMXF";
pub const VERSION: u32 = 1;
const ENDIAN_MARK: u32 = 0x0A0B_0C0D;

pub fn write_fields<T: Real, W: Write>(out: &mut W, fields: &[&SpaceTimeField<T>]) -> Result<()> {
    let first = fields.first().ok_or_else(|| Error::Format("no components to write".into()))?;
    let g = first.grid;
    if fields.iter().any(|f| f.grid != g) {
        return Err(Error::GridMismatch("components must share one grid".into()));
    }
    let mut head = Vec::with_capacity(68);
    head.extend_from_slice(MAGIC);
    for v in [ENDIAN_MARK, VERSION, fields.len() as u32, 3] {
        head.extend_from_slice(&v.to_le_bytes());
    }
    for n in [g.nt + 1, g.ny, g.nx] {
        head.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for v in [g.lx, g.ly, g.t_end] {
        head.extend_from_slice(&to_f64(v).to_le_bytes());
    }
    out.write_all(&head)?;
    let mut buf = Vec::with_capacity(8 * first.data.len());
    for f in fields {
        buf.clear();
        for &v in f.data.iter() {
            buf.extend_from_slice(&to_f64(v).to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; N]> {
    let s = bytes
        .get(*at..*at + N)
        .ok_or_else(|| Error::Format(format!("truncated at byte {}", *at)))?;
    *at += N;
    Ok(s.try_into().unwrap())
}

pub fn read_fields<T: Real, R: Read>(input: &mut R) -> Result<Vec<SpaceTimeField<T>>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut at = 0;
    if &take::<4>(&bytes, &mut at)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |at: &mut usize| -> Result<u32> { Ok(u32::from_le_bytes(take::<4>(&bytes, at)?)) };
    if u32_at(&mut at)? != ENDIAN_MARK {
        return Err(Error::Format("bad endian marker".into()));
    }
    let version = u32_at(&mut at)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let ncomp = u32_at(&mut at)? as usize;
    let ndims = u32_at(&mut at)?;
    if ndims != 3 {
        return Err(Error::Format(format!("expected 3 axes, found {ndims}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = u64::from_le_bytes(take::<8>(&bytes, &mut at)?) as usize;
    }
    let mut ext = [0f64; 3];
    for e in &mut ext {
        *e = f64::from_le_bytes(take::<8>(&bytes, &mut at)?);
    }
    if dims[0] == 0 {
        return Err(Error::Format("empty time axis".into()));
    }
    let grid = GridSpec::new(lit(ext[0]), lit(ext[1]), dims[2], dims[1], lit(ext[2]), dims[0] - 1)?;
    let len = dims.iter().product::<usize>();
    let expected = at + 8 * len * ncomp;
    if bytes.len() != expected {
        return Err(Error::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    (0..ncomp)
        .map(|_| {
            let data: Vec<T> = (0..len)
                .map(|_| take::<8>(&bytes, &mut at).map(|b| lit(f64::from_le_bytes(b))))
                .collect::<Result<_>>()?;
            let arr = Array3::from_shape_vec((dims[0], dims[1], dims[2]), data)
                .map_err(|e| Error::Format(e.to_string()))?;
            SpaceTimeField::from_array(grid, arr)
        })
        .collect()
}

pub fn save<T: Real>(path: &std::path::Path, fields: &[&SpaceTimeField<T>]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_fields(&mut w, fields)?;
    w.flush()?;
    Ok(())
}

pub fn load<T: Real>(path: &std::path::Path) -> Result<Vec<SpaceTimeField<T>>> {
    read_fields(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}
