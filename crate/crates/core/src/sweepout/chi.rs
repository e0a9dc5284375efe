//! Antiperiodic sweepout functions `χ(θ, x) = F(θ + h(x₂))`.
//!
//! `F` is the `2π`-periodic square wave (`+1` on `[0, π)`, `−1` on `[π, 2π)`) convolved with
//! a compactly supported bump of half-width `δ`, and `h` is a tent map of the second torus
//! coordinate onto `[δ, π − δ]`. Then `χ(0, ·) = 1`, `χ(θ + π, ·) = −χ(θ, ·)`, and
//! `{−1 < χ(θ, ·) < 1}` is a band of area at most `Vol · 2δ/(π − 2δ)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::spectral::{ScalarField, SpectralBasis, TorusGeometry};

/// Number of `θ` samples used to certify a new sweepout.
pub const CERT_SAMPLES: usize = 64;

fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step on `[−1, 1]`: the distribution function of the bump `S′`, which is `C^∞`,
/// supported in `[−1, 1]` and of unit integral.
pub fn smooth_step(z: f64) -> f64 {
    if z <= -1.0 {
        return 0.0;
    }
    if z >= 1.0 {
        return 1.0;
    }
    let a = flat(1.0 + z);
    a / (a + flat(1.0 - z))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepoutChi {
    /// Budget for the area of the interface band.
    pub epsilon: f64,
    /// Half-width of the mollifier.
    pub width_delta: f64,
    /// Torus coordinate used as height (always `1`, i.e. `x₂`).
    pub height_axis: usize,
    side_length: f64,
}

/// Worst defects found while certifying a sweepout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiCertificate {
    /// `max |χ(0, x) − 1|`.
    pub identity_defect: f64,
    /// `max |χ(θ + π, x) + χ(θ, x)|`.
    pub antiperiodic_defect: f64,
    /// Largest grid-measured interface area.
    pub max_interface: f64,
}

impl SweepoutChi {
    /// Tent map of `x₂` onto `[δ, π − δ]`.
    pub fn height(&self, x2: f64) -> f64 {
        let d = self.width_delta;
        let y = (x2 / self.side_length).rem_euclid(1.0);
        d + (PI - 2.0 * d) * (1.0 - (2.0 * y - 1.0).abs())
    }

    /// The mollified square wave.
    pub fn wave(&self, s: f64) -> f64 {
        let d = self.width_delta;
        let t = s.rem_euclid(2.0 * PI);
        if t < d {
            2.0 * smooth_step(t / d) - 1.0
        } else if t > 2.0 * PI - d {
            2.0 * smooth_step((t - 2.0 * PI) / d) - 1.0
        } else if (t - PI).abs() < d {
            1.0 - 2.0 * smooth_step((t - PI) / d)
        } else if t < PI {
            1.0
        } else {
            -1.0
        }
    }

    pub fn eval(&self, theta: f64, x: [f64; 2]) -> f64 {
        // Reduce to θ ∈ [0, π); antiperiodicity is then exact whenever θ and θ + π reduce exactly.
        let t = theta.rem_euclid(2.0 * PI);
        if t >= PI {
            return -self.eval(t - PI, x);
        }
        self.wave(t + self.height(x[self.height_axis]))
    }

    /// Values of `χ(θ, ·)` at the collocation points, in grid order.
    pub fn grid_values(&self, theta: f64, geom: &TorusGeometry) -> Vec<f64> {
        let n = geom.grid_n;
        let mut out = Vec::with_capacity(n * n);
        for i1 in 0..n {
            for i2 in 0..n {
                out.push(self.eval(theta, geom.point(i1, i2)));
            }
        }
        out
    }

    /// Grid-measured area of `{−1 < χ(θ, ·) < 1}`.
    pub fn interface_volume(&self, theta: f64, geom: &TorusGeometry) -> f64 {
        let count = self.grid_values(theta, geom).iter().filter(|v| v.abs() < 1.0).count();
        count as f64 * geom.cell_weight()
    }

    /// Area bound `Vol · 2δ/(π − 2δ)` of the interface band.
    pub fn band_volume(&self) -> f64 {
        let d = self.width_delta;
        self.side_length * self.side_length * 2.0 * d / (PI - 2.0 * d)
    }

    /// `χ(θ, ·) · amplitude` as a band-limited scalar field.
    pub fn scaled_field(&self, theta: f64, amplitude: f64, basis: &SpectralBasis) -> Result<ScalarField> {
        let vals = self
            .grid_values(theta, basis.geometry())
            .into_iter()
            .map(|v| v * amplitude)
            .collect();
        basis.scalar_from_grid(vals)
    }

    /// Check the three sweepout properties on `n_theta` uniform samples of `[0, 2π)`.
    pub fn certify(&self, geom: &TorusGeometry, n_theta: usize) -> ChiCertificate {
        let identity_defect = self
            .grid_values(0.0, geom)
            .iter()
            .map(|v| (v - 1.0).abs())
            .fold(0.0, f64::max);
        let mut antiperiodic_defect: f64 = 0.0;
        let mut max_interface: f64 = 0.0;
        for k in 0..n_theta {
            let theta = 2.0 * PI * k as f64 / n_theta as f64;
            let a = self.grid_values(theta, geom);
            let b = self.grid_values(theta + PI, geom);
            for (x, y) in a.iter().zip(&b) {
                antiperiodic_defect = antiperiodic_defect.max((x + y).abs());
            }
            max_interface = max_interface.max(self.interface_volume(theta, geom));
        }
        ChiCertificate {
            identity_defect,
            antiperiodic_defect,
            max_interface,
        }
    }
}

/// Sweepout with interface area below `epsilon`, certified on [`CERT_SAMPLES`] values of `θ`.
///
/// Counting grid cells overestimates the band area by at most `2·h·L`, so the band area is
/// placed midway between `4·h·L` (four cells in `x₂`) and `ε − 2·h·L`, capped at `0.8·ε`.
pub fn build_sweepout_chi(geom: &TorusGeometry, epsilon: f64) -> Result<SweepoutChi> {
    geom.validate()?;
    let vol = geom.volume();
    if !(epsilon > 0.0 && epsilon < vol / 4.0) {
        return Err(SolverError::Config(format!(
            "epsilon must lie in (0, Vol/4) = (0, {}), got {epsilon}",
            vol / 4.0
        )));
    }
    let l = geom.side_length;
    let h = geom.grid_spacing();
    let (lo, hi) = (4.0 * h * l, epsilon - 2.0 * h * l);
    if hi <= lo {
        return Err(SolverError::Resolution(format!(
            "interface band for epsilon = {epsilon} is thinner than 4 grid cells at grid {}",
            geom.grid_n
        )));
    }
    let band = (0.5 * (lo + hi)).min(0.8 * epsilon);
    let e = band / vol;
    let chi = SweepoutChi {
        epsilon,
        width_delta: PI * e / (2.0 * (1.0 + e)),
        height_axis: 1,
        side_length: l,
    };
    let cert = chi.certify(geom, CERT_SAMPLES);
    if cert.identity_defect > 1e-12 || cert.antiperiodic_defect > 1e-12 || cert.max_interface >= epsilon {
        return Err(SolverError::Resolution(format!("sweepout failed certification: {cert:?}")));
    }
    Ok(chi)
}
