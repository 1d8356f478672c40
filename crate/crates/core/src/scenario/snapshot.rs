//! Binary field snapshots.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                  |
//! |--------|------|--------------------------|
//! | 0      | 4    | magic `b"BGEV"`          |
//! | 4      | 4    | format version, `u32`    |
//! | 8      | 8    | `N`, `u64`               |
//! | 16     | 8    | box length `L`, `f64`    |
//! | 24     | 8    | time `t`, `f64`          |
//! | 32     | 8    | `b`, `f64`               |
//! | 40     | 8N   | samples `u(x_j)`, `f64`  |

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectral::{GridSpec, RealField};

pub const MAGIC: [u8; 4] = *b"BGEV";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub b: f64,
    pub field: RealField,
}

impl Snapshot {
    pub fn new(t: f64, b: f64, field: RealField) -> Self {
        Self { t, b, field }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let grid = self.field.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.n_points());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(grid.n_points() as u64).to_le_bytes());
        out.extend_from_slice(&grid.box_length().to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        out.extend_from_slice(&self.b.to_le_bytes());
        for v in self.field.samples() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!("truncated header: {} bytes", bytes.len())));
        }
        let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
        if bytes[0..4] != MAGIC {
            return Err(Error::Format(format!("bad magic {:?}", &bytes[0..4])));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4-byte slice"));
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported snapshot version {version} (expected {FORMAT_VERSION})"
            )));
        }
        let n = u64::from_le_bytes(word(8));
        let box_length = f64::from_le_bytes(word(16));
        let t = f64::from_le_bytes(word(24));
        let b = f64::from_le_bytes(word(32));
        let expected = usize::try_from(n)
            .ok()
            .and_then(|n| n.checked_mul(8))
            .and_then(|p| p.checked_add(HEADER_LEN))
            .ok_or_else(|| Error::Format(format!("implausible point count {n}")))?;
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "payload holds {} bytes, header promises {}",
                bytes.len() - HEADER_LEN,
                expected - HEADER_LEN
            )));
        }
        let grid = GridSpec::new(n as usize, box_length).map_err(|e| Error::Format(e.to_string()))?;
        let samples = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        let field = RealField::new(grid, samples).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self { t, b, field })
    }
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(&snapshot.to_bytes())?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Snapshot::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Snapshot {
        let g = GridSpec::new(16, 3.5).unwrap();
        let field = RealField::from_fn(g, |x| x.sin() * 1e-3 + 0.1).unwrap();
        Snapshot::new(0.125, -1.0 / 3.0, field)
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[0..4], b"BGEV");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 16);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3.5);
        assert_eq!(bytes.len(), 40 + 16 * 8);
    }

    #[test]
    fn corruption_detected() {
        let good = sample().to_bytes();
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(Snapshot::from_bytes(&bad_magic), Err(Error::Format(_))));
        let mut bad_version = good.clone();
        bad_version[4] = 9;
        assert!(matches!(Snapshot::from_bytes(&bad_version), Err(Error::Format(_))));
        assert!(matches!(Snapshot::from_bytes(&good[..good.len() - 3]), Err(Error::Format(_))));
        assert!(matches!(Snapshot::from_bytes(&good[..20]), Err(Error::Format(_))));
        assert_eq!(Error::Format(String::new()).exit_code(), 3);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bgev");
        let snap = sample();
        write_snapshot(&path, &snap).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back.t.to_bits(), snap.t.to_bits());
        assert_eq!(back.b.to_bits(), snap.b.to_bits());
        assert_eq!(back, snap);
        assert!(matches!(read_snapshot(&dir.path().join("missing")), Err(Error::Io(_))));
    }

    proptest! {
        #[test]
        fn bit_exact_round_trip(
            samples in proptest::collection::vec(-1e300f64..1e300, 8..64),
            t in any::<f64>().prop_filter("finite", |v| v.is_finite()),
            b in -10.0f64..10.0,
        ) {
            let n = samples.len() & !1;
            let n = n.max(8);
            let mut samples = samples;
            samples.resize(n, 0.5);
            let grid = GridSpec::new(n, 1.25).unwrap();
            let snap = Snapshot::new(t, b, RealField::new(grid, samples).unwrap());
            let back = Snapshot::from_bytes(&snap.to_bytes()).unwrap();
            let same = back.field.samples().iter().zip(snap.field.samples()).all(|(a, c)| a.to_bits() == c.to_bits());
            prop_assert!(same);
            prop_assert_eq!(back.t.to_bits(), t.to_bits());
        }
    }
}
