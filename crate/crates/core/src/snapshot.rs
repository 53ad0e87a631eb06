//! Binary field snapshots.
//!
//! Layout (all little-endian):
//!
//! | offset | type     | content                     |
//! |--------|----------|-----------------------------|
//! | 0      | [u8; 4]  | magic `BLGV`                |
//! | 4      | u32      | format version (1)          |
//! | 8      | u32      | nx                          |
//! | 12     | u32      | ny                          |
//! | 16     | f64      | lx                          |
//! | 24     | f64      | ymax                        |
//! | 32     | f64      | t                           |
//! | 40     | f64 × nx·ny | values, index `ix * ny + jy` |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridRef};

pub const MAGIC: &[u8; 4] = b"BLGV";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

pub fn encode(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
    out.extend_from_slice(&g.lx().to_le_bytes());
    out.extend_from_slice(&g.ymax().to_le_bytes());
    out.extend_from_slice(&f.t.to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write(f: &Field, w: &mut impl Write) -> Result<()> {
    w.write_all(&encode(f))?;
    Ok(())
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().unwrap())
}

/// Decodes a snapshot, building a fresh grid from the header.
pub fn decode(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!(
            "truncated header ({} bytes)",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let nx = u32_at(bytes, 8) as usize;
    let ny = u32_at(bytes, 12) as usize;
    let grid: GridRef = Grid::new(f64_at(bytes, 16), nx, f64_at(bytes, 24), ny)?;
    let t = f64_at(bytes, 32);
    let expect = HEADER_LEN + 8 * nx * ny;
    if bytes.len() != expect {
        return Err(Error::Snapshot(format!(
            "expected {expect} bytes, got {}",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(&grid, values, t)
}

pub fn read(r: &mut impl Read) -> Result<Field> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode(&buf)
}
