//! WBSNAP1 binary snapshots.
//!
//! Layout, all little endian:
//!
//! ```text
//! "WBSNAP1"          7 bytes
//! dim                u32
//! n per axis         u64 x dim
//! L per axis         f64 x dim
//! time               f64
//! eta, v_1, .., v_d  f64 x (n_1 ... n_d) each, row major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::state::WaveState;

pub const MAGIC: &[u8; 7] = b"WBSNAP1";

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub dim: usize,
    pub n: Vec<usize>,
    pub lengths: Vec<f64>,
    pub time: f64,
}

pub fn write_snapshot(mut w: impl Write, state: &WaveState) -> Result<()> {
    let grid = state.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in grid.shape() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &l in grid.lengths() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&state.time.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * grid.len() * (1 + state.dim()));
    for f in std::iter::once(&state.eta).chain(&state.vel) {
        for v in f.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn save_snapshot(path: impl AsRef<Path>, state: &WaveState) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_snapshot(&mut w, state)?;
    w.flush()?;
    Ok(())
}

fn take<const N: usize>(r: &mut impl Read, what: &str) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Snapshot(format!("truncated while reading {what}: {e}")))?;
    Ok(b)
}

pub fn read_header(r: &mut impl Read) -> Result<SnapshotHeader> {
    let magic: [u8; 7] = take(r, "magic")?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic, expected WBSNAP1".into()));
    }
    let dim = u32::from_le_bytes(take(r, "dim")?) as usize;
    if dim != 1 && dim != 2 {
        return Err(Error::Snapshot(format!("dimension {dim} is not 1 or 2")));
    }
    let n = (0..dim)
        .map(|_| Ok(u64::from_le_bytes(take(r, "n")?) as usize))
        .collect::<Result<Vec<_>>>()?;
    let lengths = (0..dim)
        .map(|_| Ok(f64::from_le_bytes(take(r, "L")?)))
        .collect::<Result<Vec<_>>>()?;
    let time = f64::from_le_bytes(take(r, "time")?);
    Ok(SnapshotHeader { dim, n, lengths, time })
}

pub fn read_snapshot(mut r: impl Read) -> Result<WaveState> {
    let header = read_header(&mut r)?;
    let grid = Grid::new(&header.n, &header.lengths).map_err(|e| Error::Snapshot(e.to_string()))?;
    let len = grid.len();
    let mut raw = vec![0u8; 8 * len];
    let mut fields = Vec::with_capacity(1 + header.dim);
    for k in 0..=header.dim {
        r.read_exact(&mut raw)
            .map_err(|e| Error::Snapshot(format!("truncated field {k}: {e}")))?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        fields.push(Field::new(grid.clone(), values)?);
    }
    let mut it = fields.into_iter();
    let eta = it.next().expect("eta present");
    WaveState::new(eta, it.collect(), header.time)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<WaveState> {
    let file = std::fs::File::open(path)?;
    read_snapshot(std::io::BufReader::new(file))
}
