use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SolverError};

/// Flat square torus `[0, L)²` sampled on an `n × n` collocation grid, together with a
/// choice of spin structure.
///
/// The spin structure is encoded by the offset `δ ∈ {0, 1/2}²`: spinor Fourier modes live
/// on the shifted lattice `k + δ`, `k ∈ ℤ²`. Only `δ = (0, 0)` admits harmonic spinors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    pub side_length: f64,
    pub grid_n: usize,
    pub spin_delta: [f64; 2],
}

impl TorusGeometry {
    pub fn new(side_length: f64, grid_n: usize, spin_delta: [f64; 2]) -> Result<Self> {
        let geom = Self {
            side_length,
            grid_n,
            spin_delta,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// The `2π`-torus with the given grid and spin structure.
    pub fn standard(grid_n: usize, spin_delta: [f64; 2]) -> Result<Self> {
        Self::new(2.0 * PI, grid_n, spin_delta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.side_length.is_finite() && self.side_length > 0.0) {
            return Err(SolverError::Config(format!(
                "side_length must be positive, got {}",
                self.side_length
            )));
        }
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(SolverError::Config(format!(
                "grid_n must be even and >= 8, got {}",
                self.grid_n
            )));
        }
        for (axis, d) in self.spin_delta.iter().enumerate() {
            if *d != 0.0 && *d != 0.5 {
                return Err(SolverError::Config(format!(
                    "spin_delta[{axis}] must be exactly 0 or 1/2, got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.side_length * self.side_length
    }

    /// Uniform quadrature weight `(L/n)²`.
    pub fn cell_weight(&self) -> f64 {
        let h = self.side_length / self.grid_n as f64;
        h * h
    }

    pub fn grid_spacing(&self) -> f64 {
        self.side_length / self.grid_n as f64
    }

    /// `2π / L`: physical frequency of the unit lattice vector.
    pub fn wavenumber_unit(&self) -> f64 {
        2.0 * PI / self.side_length
    }

    /// Largest admissible spectral cutoff `(n/2 − 1) · 2π/L`.
    pub fn nyquist_cutoff(&self) -> f64 {
        (self.grid_n as f64 / 2.0 - 1.0) * self.wavenumber_unit()
    }

    /// Twice the spin offset as integers; conjugation maps `k ↦ −k − 2δ`.
    pub(crate) fn twice_delta(&self) -> [i32; 2] {
        [
            (2.0 * self.spin_delta[0]) as i32,
            (2.0 * self.spin_delta[1]) as i32,
        ]
    }

    pub fn has_harmonic_spinors(&self) -> bool {
        self.spin_delta == [0.0, 0.0]
    }

    /// Grid coordinates of collocation point `(i1, i2)`.
    pub fn point(&self, i1: usize, i2: usize) -> [f64; 2] {
        let h = self.grid_spacing();
        [i1 as f64 * h, i2 as f64 * h]
    }

    /// All four spin structures of the torus.
    pub fn all_spin_structures() -> [[f64; 2]; 4] {
        [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grid_and_delta() {
        assert!(TorusGeometry::standard(6, [0.5, 0.5]).is_err());
        assert!(TorusGeometry::standard(15, [0.5, 0.5]).is_err());
        assert!(TorusGeometry::standard(16, [0.25, 0.5]).is_err());
        assert!(TorusGeometry::new(-1.0, 16, [0.0, 0.0]).is_err());
        assert!(TorusGeometry::standard(16, [0.0, 0.5]).is_ok());
    }

    #[test]
    fn quadrature_weight_is_uniform() {
        let g = TorusGeometry::standard(32, [0.5, 0.5]).unwrap();
        let w = g.cell_weight() * (32 * 32) as f64;
        assert!((w - g.volume()).abs() < 1e-12);
        assert!((g.nyquist_cutoff() - 15.0).abs() < 1e-12);
    }
}
