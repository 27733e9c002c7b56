//! Flat binary field snapshots with a JSON sidecar.
//!
//! Layout: site-major, each site an `r×r` row-major matrix, each entry two
//! little-endian `f64` (real, imaginary). The sidecar `<path>.json` records
//! the rank and the per-axis shape.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EndoField, LatticeError};
use crate::cmat::{CMat, C64};

const LAYOUT: &str = "site-major, row-major r x r, complex as (re, im) little-endian f64";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub rank: usize,
    /// Sites per axis in storage order (slowest first).
    pub shape: Vec<usize>,
    pub layout: String,
    /// Optional free-form label such as the field name or time.
    #[serde(default)]
    pub label: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `field` to `path` and its header to `path.json`.
pub fn write_field(path: &Path, field: &EndoField, shape: &[usize], label: &str) -> Result<(), LatticeError> {
    let sites: usize = shape.iter().product();
    if sites != field.len() {
        return Err(LatticeError::SizeMismatch { expected: sites, found: field.len() });
    }
    let r = field.rank();
    let mut buf = Vec::with_capacity(field.len() * r * r * 16);
    for m in field.as_slice() {
        for i in 0..r {
            for j in 0..r {
                buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
            }
        }
    }
    fs::File::create(path)?.write_all(&buf)?;
    let header = FieldHeader { rank: r, shape: shape.to_vec(), layout: LAYOUT.into(), label: label.into() };
    let json = serde_json::to_string_pretty(&header).map_err(|e| LatticeError::Format(e.to_string()))?;
    fs::write(sidecar(path), json)?;
    Ok(())
}

/// Reads a field written by [`write_field`].
pub fn read_field(path: &Path) -> Result<(FieldHeader, EndoField), LatticeError> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(sidecar(path))?)
        .map_err(|e| LatticeError::Format(e.to_string()))?;
    let r = header.rank;
    let sites: usize = header.shape.iter().product();
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() != sites * r * r * 16 {
        return Err(LatticeError::Format(format!("expected {} bytes, found {}", sites * r * r * 16, buf.len())));
    }
    let f = |k: usize| f64::from_le_bytes(buf[8 * k..8 * k + 8].try_into().unwrap());
    let data = (0..sites)
        .map(|x| CMat::from_fn(r, |i, j| {
            let k = 2 * ((x * r + i) * r + j);
            C64::new(f(k), f(k + 1))
        }))
        .collect();
    Ok((header, EndoField::from_vec(r, data)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.bin");
        let f = EndoField::from_fn(2, 6, |x| CMat::from_fn(2, |i, j| C64::new(x as f64 + i as f64, j as f64 - 0.5)));
        write_field(&p, &f, &[2, 3], "H").unwrap();
        let (h, g) = read_field(&p).unwrap();
        assert_eq!(h.shape, vec![2, 3]);
        assert_eq!(g, f);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 6 * 4 * 16);
    }
}
