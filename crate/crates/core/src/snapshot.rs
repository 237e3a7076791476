//! Fixed-header binary snapshots.
//!
//! Layout (little-endian): 8-byte magic, `u32` version, `u32` endianness
//! marker `0x01020304`, `u64` nx/ny/nz, `f64` lx/ly/lz, `f64` time,
//! `u64` step, `u32` component count, `u32` scalar width (8), then the
//! components one after another as `f64` arrays in grid order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid, TensorField};

pub const TENSOR_MAGIC: [u8; 8] = *b"QTSNAP\0\0";
pub const SFACTOR_MAGIC: [u8; 8] = *b"QTSFAC\0\0";
pub const SCALAR_MAGIC: [u8; 8] = *b"QTSCAL\0\0";
pub const VERSION: u32 = 1;
pub const ENDIAN_MARK: u32 = 0x0102_0304;
pub const HEADER_LEN: usize = 88;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotHeader {
    pub magic: [u8; 8],
    pub version: u32,
    pub grid: Grid,
    pub time: f64,
    pub step: u64,
    pub components: u32,
    pub width: u32,
}

impl SnapshotHeader {
    pub fn new(magic: [u8; 8], grid: Grid, time: f64, step: u64, components: u32) -> Self {
        SnapshotHeader { magic, version: VERSION, grid, time, step, components, width: 8 }
    }

    pub fn payload_len(&self) -> u64 {
        self.components as u64 * self.grid.len() as u64 * self.width as u64
    }

    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut b = Vec::with_capacity(HEADER_LEN);
        b.extend_from_slice(&self.magic);
        b.extend_from_slice(&self.version.to_le_bytes());
        b.extend_from_slice(&ENDIAN_MARK.to_le_bytes());
        for n in self.grid.dims() {
            b.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for l in self.grid.lengths() {
            b.extend_from_slice(&l.to_le_bytes());
        }
        b.extend_from_slice(&self.time.to_le_bytes());
        b.extend_from_slice(&self.step.to_le_bytes());
        b.extend_from_slice(&self.components.to_le_bytes());
        b.extend_from_slice(&self.width.to_le_bytes());
        b.try_into().expect("fixed header size")
    }

    fn decode(b: &[u8; HEADER_LEN], path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::Snapshot { path: path.to_path_buf(), reason };
        let u32_at = |o: usize| u32::from_le_bytes(b[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(b[o..o + 8].try_into().unwrap());
        let magic: [u8; 8] = b[..8].try_into().unwrap();
        if ![TENSOR_MAGIC, SFACTOR_MAGIC, SCALAR_MAGIC].contains(&magic) {
            return Err(bad(format!("unknown magic {:?}", String::from_utf8_lossy(&magic))));
        }
        let version = u32_at(8);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        if u32_at(12) != ENDIAN_MARK {
            return Err(bad("endianness marker mismatch".into()));
        }
        let dims = [u64_at(16), u64_at(24), u64_at(32)].map(|n| n as usize);
        let lengths = [f64_at(40), f64_at(48), f64_at(56)];
        let grid = Grid::new(dims, lengths).map_err(|e| bad(e.to_string()))?;
        let width = u32_at(84);
        if width != 8 {
            return Err(bad(format!("scalar width {width}, expected 8")));
        }
        Ok(SnapshotHeader { magic, version, grid, time: f64_at(64), step: u64_at(72), components: u32_at(80), width })
    }
}

/// Writes a header and the given arrays.
pub fn write_arrays(path: &Path, header: &SnapshotHeader, arrays: &[&[f64]]) -> Result<()> {
    if arrays.len() != header.components as usize || arrays.iter().any(|a| a.len() != header.grid.len()) {
        return Err(Error::GridMismatch);
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&header.encode())?;
    for a in arrays {
        for v in a.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads any file in the snapshot family.
pub fn read_arrays(path: &Path) -> Result<(SnapshotHeader, Vec<Vec<f64>>)> {
    let bad = |reason: &str| Error::Snapshot { path: path.to_path_buf(), reason: reason.into() };
    let file = File::open(path)?;
    let total = file.metadata()?.len();
    let mut r = BufReader::new(file);
    let mut hb = [0u8; HEADER_LEN];
    r.read_exact(&mut hb).map_err(|_| bad("truncated header"))?;
    let header = SnapshotHeader::decode(&hb, path)?;
    if total != HEADER_LEN as u64 + header.payload_len() {
        return Err(bad(&format!(
            "payload is {} bytes, header implies {}",
            total.saturating_sub(HEADER_LEN as u64),
            header.payload_len()
        )));
    }
    let n = header.grid.len();
    let mut buf = vec![0u8; n * 8];
    let mut out = Vec::with_capacity(header.components as usize);
    for _ in 0..header.components {
        r.read_exact(&mut buf).map_err(|_| bad("truncated payload"))?;
        out.push(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    Ok((header, out))
}

pub fn write_snapshot(path: &Path, f: &TensorField, time: f64, step: u64) -> Result<()> {
    let header = SnapshotHeader::new(TENSOR_MAGIC, *f.grid(), time, step, 5);
    let arrays: Vec<&[f64]> = f.components().iter().map(|c| c.as_slice()).collect();
    write_arrays(path, &header, &arrays)
}

pub fn read_snapshot(path: &Path) -> Result<(TensorField, SnapshotHeader)> {
    let (header, arrays) = read_arrays(path)?;
    if header.magic != TENSOR_MAGIC || header.components != 5 {
        return Err(Error::Snapshot { path: path.to_path_buf(), reason: "not a tensor snapshot".into() });
    }
    let data: [Vec<f64>; 5] = arrays.try_into().expect("five components");
    Ok((TensorField::from_components(header.grid, data)?, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field() -> TensorField {
        let g = Grid::new([4, 2, 6], [1.0, 2.0, 3.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut f = TensorField::zeros(g);
        for c in 0..5 {
            for v in f.component_mut(c) {
                *v = rng.random_range(-1e3..1e3);
            }
        }
        f
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.qts");
        let f = field();
        write_snapshot(&p, &f, 0.125, 4).unwrap();
        let (g, h) = read_snapshot(&p).unwrap();
        assert_eq!((h.time, h.step, h.components), (0.125, 4, 5));
        for c in 0..5 {
            let a: Vec<u64> = f.component(c).iter().map(|v| v.to_bits()).collect();
            let b: Vec<u64> = g.component(c).iter().map(|v| v.to_bits()).collect();
            assert_eq!(a, b);
        }
        let len = std::fs::metadata(&p).unwrap().len();
        assert_eq!(len, HEADER_LEN as u64 + 5 * 48 * 8);
    }

    #[test]
    fn rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.qts");
        write_snapshot(&p, &field(), 0.0, 0).unwrap();
        let bytes = std::fs::read(&p).unwrap();

        let t = dir.path().join("t.qts");
        std::fs::write(&t, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(read_snapshot(&t), Err(Error::Snapshot { .. })));

        let mut m = bytes.clone();
        m[0] = b'X';
        std::fs::write(&t, &m).unwrap();
        assert!(matches!(read_snapshot(&t), Err(Error::Snapshot { .. })));

        let mut v = bytes.clone();
        v[8] = 2;
        std::fs::write(&t, &v).unwrap();
        assert!(matches!(read_snapshot(&t), Err(Error::Snapshot { .. })));

        std::fs::write(&t, &bytes[..10]).unwrap();
        assert!(read_snapshot(&t).is_err());
    }
}
