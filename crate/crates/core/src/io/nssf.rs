//! NSSF1 field snapshots.
//!
//! Layout: magic `NSSF1\0`, then little-endian `u32 N`, `f64 L`, `f64 ν`,
//! `f64 t` (NaN when unset), then the x, y and z coefficient blocks in
//! storage order, each entry as `(re, im)` f64 pairs.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;

pub const MAGIC: &[u8; 6] = b"NSSF1\0";
const HEADER: usize = 6 + 4 + 8 * 3;

pub fn encode(u: &SpectralVelocityField) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER + 3 * g.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    out.extend_from_slice(&u.nu().to_le_bytes());
    out.extend_from_slice(&u.time().unwrap_or(f64::NAN).to_le_bytes());
    for c in u.coeffs() {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode(bytes: &[u8]) -> Result<SpectralVelocityField> {
    let head = &bytes[..bytes.len().min(6)];
    if head != &MAGIC[..head.len()] {
        if head.len() >= 5 && &head[..4] == b"NSSF" {
            let version = head.iter().take_while(|b| **b != 0).map(|b| *b as char).collect();
            return Err(Error::VersionMismatch(version));
        }
        return Err(Error::UnrecognizedFormat);
    }
    if bytes.len() < HEADER {
        return Err(Error::UnexpectedEof);
    }
    let n = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let length = f64_at(bytes, 10);
    let nu = f64_at(bytes, 18);
    let t = f64_at(bytes, 26);
    let grid = WaveGrid::new(n, length)?;
    let payload = grid.len().checked_mul(48).ok_or(Error::UnexpectedEof)?;
    let end = HEADER.checked_add(payload).ok_or(Error::UnexpectedEof)?;
    if bytes.len() < end {
        return Err(Error::UnexpectedEof);
    }
    if bytes.len() > end {
        return Err(Error::TrailingBytes);
    }
    let mut coeffs: [Vec<Complex64>; 3] = Default::default();
    for (c, block) in coeffs.iter_mut().enumerate() {
        let base = HEADER + c * grid.len() * 16;
        *block = (0..grid.len())
            .map(|i| Complex64::new(f64_at(bytes, base + 16 * i), f64_at(bytes, base + 16 * i + 8)))
            .collect();
    }
    let u = SpectralVelocityField::from_coeffs(grid, nu, coeffs)?;
    Ok(u.with_time((!t.is_nan()).then_some(t)))
}

pub fn save_field(u: &SpectralVelocityField, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(u))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<SpectralVelocityField> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpectralVelocityField {
        crate::sampling::random_solenoidal(WaveGrid::new(8, 3.5).unwrap(), 0.013, 3, 21).with_time(Some(0.125))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let u = sample();
        let v = decode(&encode(&u)).unwrap();
        assert_eq!(encode(&v), encode(&u));
        assert_eq!(v.time(), Some(0.125));
        assert_eq!(v.nu().to_bits(), 0.013f64.to_bits());
        let w = decode(&encode(&u.clone().with_time(None))).unwrap();
        assert_eq!(w.time(), None);
    }

    #[test]
    fn corruption_errors_are_distinct() {
        let bytes = encode(&sample());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad).unwrap_err().to_string(), "unrecognized format");
        let mut v2 = bytes.clone();
        v2[4] = b'2';
        assert!(matches!(decode(&v2), Err(Error::VersionMismatch(v)) if v == "NSSF2"));
        assert_eq!(decode(&bytes[..bytes.len() - 3]).unwrap_err().to_string(), "unexpected end of payload");
        assert!(matches!(decode(&bytes[..3]), Err(Error::UnexpectedEof)));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(Error::TrailingBytes)));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.nssf");
        let u = sample();
        save_field(&u, &p).unwrap();
        assert_eq!(encode(&load_field(&p).unwrap()), encode(&u));
    }
}
