//! Binary checkpoints of Nehari points.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      8 bytes  "SSHG0001"
//! version    u8       1
//! geometry   f64 side_length, u64 grid_n, f64 delta_1, f64 delta_2
//! rho        f64
//! level      f64
//! u block    u64 n, then n f64 grid values
//! psi block  u64 m, then m (re, im) f64 pairs in Dirac eigen-coordinates
//! ```

use std::path::Path;

use num_complex::Complex64;
use sshg_core::action::ActionParams;
use sshg_core::nehari::{constraint_norm, NehariPoint, SpinorSplit};
use sshg_core::spectral::{ScalarField, SpectralBasis, SpinorField, TorusGeometry};

use crate::error::CliError;
use crate::output::write_atomic;

pub const MAGIC: &[u8; 8] = b"SSHG0001";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub geometry: TorusGeometry,
    pub rho: f64,
    pub level: f64,
    pub u: ScalarField,
    pub psi: SpinorField,
}

impl Checkpoint {
    pub fn new(point: &NehariPoint, level: f64, params: &ActionParams, basis: &SpectralBasis) -> Self {
        Self {
            geometry: *basis.geometry(),
            rho: params.rho,
            level,
            u: point.u.clone(),
            psi: point.psi.clone(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = &self.geometry;
        let mut out = Vec::with_capacity(64 + 8 * self.u.len() + 16 * self.psi.len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&g.side_length.to_le_bytes());
        out.extend_from_slice(&(g.grid_n as u64).to_le_bytes());
        out.extend_from_slice(&g.spin_delta[0].to_le_bytes());
        out.extend_from_slice(&g.spin_delta[1].to_le_bytes());
        out.extend_from_slice(&self.rho.to_le_bytes());
        out.extend_from_slice(&self.level.to_le_bytes());
        out.extend_from_slice(&(self.u.len() as u64).to_le_bytes());
        for v in &self.u.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.psi.len() as u64).to_le_bytes());
        for c in &self.psi.coeffs {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err("bad magic, not an SSHG checkpoint".into());
        }
        let version = r.take(1)?[0];
        if version != VERSION {
            return Err(format!("unsupported version {version}, expected {VERSION}"));
        }
        let side_length = r.f64()?;
        let grid_n = r.u64()? as usize;
        let spin_delta = [r.f64()?, r.f64()?];
        let geometry = TorusGeometry::new(side_length, grid_n, spin_delta).map_err(|e| e.to_string())?;
        let rho = r.f64()?;
        let level = r.f64()?;
        let n = r.len(8)?;
        let values = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        let m = r.len(16)?;
        let coeffs = (0..m)
            .map(|_| Ok(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Result<Vec<_>, String>>()?;
        if r.pos != bytes.len() {
            return Err(format!("{} trailing bytes", bytes.len() - r.pos));
        }
        Ok(Self {
            geometry,
            rho,
            level,
            u: ScalarField { values },
            psi: SpinorField { coeffs },
        })
    }

    /// Rebuild the Nehari point on `basis`, which must share the stored geometry.
    pub fn to_point(&self, params: &ActionParams, basis: &SpectralBasis) -> sshg_core::Result<NehariPoint> {
        basis.check_scalar(&self.u)?;
        basis.check_spinor(&self.psi)?;
        Ok(NehariPoint {
            split: SpinorSplit::compute(&self.psi, params.rho, basis)?,
            constraint_norm: constraint_norm(&self.u, &self.psi, params, basis)?,
            u: self.u.clone(),
            psi: self.psi.clone(),
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            format!("truncated at byte {} (wanted {n} more of {})", self.pos, self.bytes.len())
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// Block length, rejected early when the file cannot hold `len * width` more bytes.
    fn len(&mut self, width: usize) -> Result<usize, String> {
        let n = self.u64()? as usize;
        if n.checked_mul(width).map_or(true, |b| b > self.bytes.len() - self.pos) {
            return Err(format!("truncated block of {n} entries at byte {}", self.pos));
        }
        Ok(n)
    }
}

pub fn checkpoint_save(path: &Path, state: &Checkpoint) -> Result<(), CliError> {
    write_atomic(path, &state.to_bytes())
}

/// Load a checkpoint and check that it was written on `expected`.
pub fn checkpoint_load(path: &Path, expected: &TorusGeometry) -> Result<Checkpoint, CliError> {
    let err = |message: String| CliError::Checkpoint {
        path: path.to_path_buf(),
        message,
    };
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let ck = Checkpoint::from_bytes(&bytes).map_err(err)?;
    if ck.geometry != *expected {
        return Err(err(format!(
            "geometry mismatch: file has grid {} / delta {:?} / L {}, run has grid {} / delta {:?} / L {}",
            ck.geometry.grid_n,
            ck.geometry.spin_delta,
            ck.geometry.side_length,
            expected.grid_n,
            expected.spin_delta,
            expected.side_length
        )));
    }
    let n = expected.grid_n * expected.grid_n;
    if ck.u.len() != n {
        return Err(err(format!("scalar block has {} values, grid needs {n}", ck.u.len())));
    }
    Ok(ck)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            geometry: TorusGeometry::standard(8, [0.5, 0.0]).unwrap(),
            rho: 0.5,
            level: -1.0 / 3.0,
            u: ScalarField {
                values: (0..64).map(|i| (i as f64 * 0.7).sin() * 1e-3 + f64::MIN_POSITIVE).collect(),
            },
            psi: SpinorField {
                coeffs: (0..10).map(|i| Complex64::new(i as f64 / 7.0, -0.1 * i as f64)).collect(),
            },
        }
    }

    #[test]
    fn bytes_round_trip() {
        let c = sample();
        assert_eq!(Checkpoint::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn every_truncation_is_rejected() {
        let b = sample().to_bytes();
        for cut in 0..b.len() {
            assert!(Checkpoint::from_bytes(&b[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn version_is_checked() {
        let mut b = sample().to_bytes();
        b[8] = 2;
        assert!(Checkpoint::from_bytes(&b).unwrap_err().contains("version"));
    }
}
