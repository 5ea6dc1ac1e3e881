//! Raw binary field dumps.
//!
//! Layout: a 64-byte header followed by `n^3` little-endian `f64` values in
//! x-fastest order.
//!
//! | bytes  | content                         |
//! |--------|---------------------------------|
//! | 0..4   | magic `HWKG`                    |
//! | 4..8   | `u32` format version (1)        |
//! | 8..16  | `u64` points per axis `n`       |
//! | 16..24 | `f64` half-extent `L`           |
//! | 24..32 | `f64` time `t`                  |
//! | 32..48 | field tag, ASCII, NUL-padded    |
//! | 48..64 | zero                            |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::{Field3, Grid};

pub const DUMP_MAGIC: &[u8; 4] = b"HWKG";
pub const DUMP_HEADER_LEN: usize = 64;
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct DumpHeader {
    pub n: usize,
    pub half_extent: f64,
    pub t: f64,
    pub tag: String,
}

impl DumpHeader {
    fn encode(&self) -> Result<[u8; DUMP_HEADER_LEN]> {
        let tag = self.tag.as_bytes();
        if tag.len() > 16 || !self.tag.is_ascii() {
            return Err(Error::Dump(format!(
                "field tag '{}' is not short ASCII",
                self.tag
            )));
        }
        let mut h = [0u8; DUMP_HEADER_LEN];
        h[0..4].copy_from_slice(DUMP_MAGIC);
        h[4..8].copy_from_slice(&VERSION.to_le_bytes());
        h[8..16].copy_from_slice(&(self.n as u64).to_le_bytes());
        h[16..24].copy_from_slice(&self.half_extent.to_le_bytes());
        h[24..32].copy_from_slice(&self.t.to_le_bytes());
        h[32..32 + tag.len()].copy_from_slice(tag);
        Ok(h)
    }

    fn decode(h: &[u8; DUMP_HEADER_LEN]) -> Result<Self> {
        if &h[0..4] != DUMP_MAGIC {
            return Err(Error::Dump("bad magic".into()));
        }
        let version = u32::from_le_bytes(h[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Dump(format!("unsupported version {version}")));
        }
        let tag_bytes: Vec<u8> = h[32..48].iter().copied().take_while(|&b| b != 0).collect();
        Ok(Self {
            n: u64::from_le_bytes(h[8..16].try_into().unwrap()) as usize,
            half_extent: f64::from_le_bytes(h[16..24].try_into().unwrap()),
            t: f64::from_le_bytes(h[24..32].try_into().unwrap()),
            tag: String::from_utf8(tag_bytes)
                .map_err(|_| Error::Dump("tag is not ASCII".into()))?,
        })
    }
}

pub fn write_dump(path: &Path, field: &Field3, t: f64, tag: &str) -> Result<()> {
    let g = field.grid();
    let header = DumpHeader {
        n: g.n(),
        half_extent: g.half_extent(),
        t,
        tag: tag.to_string(),
    }
    .encode()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&header).map_err(|e| Error::io(path, e))?;
    for v in field.interior() {
        w.write_all(&v.to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a dump back onto a non-periodic grid.
pub fn read_dump(path: &Path) -> Result<(DumpHeader, Field3)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut h = [0u8; DUMP_HEADER_LEN];
    r.read_exact(&mut h).map_err(|e| Error::io(path, e))?;
    let header = DumpHeader::decode(&h)?;
    let grid = Grid::new(header.half_extent, header.n)?;
    let mut values = vec![0.0; grid.node_count()];
    let mut buf = [0u8; 8];
    for v in values.iter_mut() {
        r.read_exact(&mut buf)
            .map_err(|_| Error::Dump("payload shorter than n^3 values".into()))?;
        *v = f64::from_le_bytes(buf);
    }
    if r.read(&mut buf).map_err(|e| Error::io(path, e))? != 0 {
        return Err(Error::Dump("trailing bytes after payload".into()));
    }
    let mut field = grid.zeros();
    field.fill_interior(|node, _| values[node[0] + grid.n() * (node[1] + grid.n() * node[2])]);
    Ok((header, field))
}
