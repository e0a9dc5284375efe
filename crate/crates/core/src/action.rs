//! The super sinh-Gordon action
//! `J(u, ψ) = ∫ |∇u|² + 8⟨Dψ, ψ⟩ − 8ρ cosh(u)|ψ|² + 4ρ² sinh²(u) dv`,
//! its first and second variations and the Euler–Lagrange residuals.
//!
//! Nonlinear densities are formed pointwise on the collocation grid and Galerkin-truncated
//! back onto the discretization, so the gradient is the exact derivative of the discrete
//! functional.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Result, SolverError};
use crate::spectral::{
    dirac_diag, hhalf_inner, hm1_inner, hmhalf_inner, riesz_h1, riesz_hhalf, scalar_multiplier, ScalarField,
    SpectralBasis, SpinorField,
};

pub const DEFAULT_U_CAP: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionParams {
    pub rho: f64,
    pub mu: Option<f64>,
    pub b: Option<f64>,
    /// Overflow guard on `max |u|`.
    pub u_cap: f64,
}

/// `ρ = 2π μ b²`.
pub fn rho_from_physics(mu: f64, b: f64) -> Result<f64> {
    if !(mu > 0.0 && b > 0.0 && mu.is_finite() && b.is_finite()) {
        return Err(SolverError::Config(format!("mu and b must be positive, got mu = {mu}, b = {b}")));
    }
    Ok(2.0 * PI * mu * b * b)
}

impl ActionParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(SolverError::Config(format!("rho must be positive, got {rho}")));
        }
        Ok(Self {
            rho,
            mu: None,
            b: None,
            u_cap: DEFAULT_U_CAP,
        })
    }

    pub fn from_physics(mu: f64, b: f64) -> Result<Self> {
        let mut p = Self::new(rho_from_physics(mu, b)?)?;
        p.mu = Some(mu);
        p.b = Some(b);
        Ok(p)
    }

    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..*self }
    }

    pub fn guard(&self, u: &ScalarField) -> Result<()> {
        let m = u.max_abs();
        if !(m <= self.u_cap) {
            return Err(SolverError::Domain {
                max_abs_u: m,
                cap: self.u_cap,
            });
        }
        Ok(())
    }
}

/// Representation of a first-variation pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// L² densities: `dJ[v, φ] = ∫ du·v + Re⟨dpsi, φ⟩`; norms taken in `H⁻¹ × H^{-1/2}`.
    Dual,
    /// Riesz representatives in `H¹ × H^{1/2}`.
    Riesz,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub du: ScalarField,
    pub dpsi: SpinorField,
    pub repr: Representation,
}

impl Variation {
    /// Pairing with a primal direction `(v, φ)`.
    pub fn pair(&self, v: &ScalarField, phi: &SpinorField, basis: &SpectralBasis) -> f64 {
        match self.repr {
            Representation::Dual => crate::spectral::l2_scalar(&self.du, v, basis) + self.dpsi.dot_l2(phi),
            Representation::Riesz => crate::spectral::h1_inner(&self.du, v, basis) + hhalf_inner(&self.dpsi, phi, basis),
        }
    }

    pub fn to_riesz(&self, basis: &SpectralBasis) -> Variation {
        match self.repr {
            Representation::Riesz => self.clone(),
            Representation::Dual => Variation {
                du: riesz_h1(&self.du, basis),
                dpsi: riesz_hhalf(&self.dpsi, basis),
                repr: Representation::Riesz,
            },
        }
    }

    /// Norm in the product metric (dual norm for `Dual`, primal norm for `Riesz`; the two agree).
    pub fn norm(&self, basis: &SpectralBasis) -> f64 {
        let (a, b) = self.component_norms(basis);
        (a * a + b * b).sqrt()
    }

    /// `(‖du‖, ‖dpsi‖)` in the metric matching the representation.
    pub fn component_norms(&self, basis: &SpectralBasis) -> (f64, f64) {
        match self.repr {
            Representation::Dual => (
                hm1_inner(&self.du, &self.du, basis).max(0.0).sqrt(),
                hmhalf_inner(&self.dpsi, &self.dpsi, basis).max(0.0).sqrt(),
            ),
            Representation::Riesz => (
                crate::spectral::h1_inner(&self.du, &self.du, basis).max(0.0).sqrt(),
                hhalf_inner(&self.dpsi, &self.dpsi, basis).max(0.0).sqrt(),
            ),
        }
    }
}

/// Grid samples shared by the evaluations at one point.
struct PointGrid {
    cosh: Vec<f64>,
    sinh: Vec<f64>,
    density: Vec<f64>,
}

fn point_grid(u: &ScalarField, psi: &SpinorField, basis: &SpectralBasis) -> PointGrid {
    PointGrid {
        cosh: u.values.iter().map(|v| v.cosh()).collect(),
        sinh: u.values.iter().map(|v| v.sinh()).collect(),
        density: basis.spinor_density(psi),
    }
}

fn check(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<()> {
    basis.check_scalar(u)?;
    basis.check_spinor(psi)?;
    params.guard(u)
}

/// `∫ |∇u|²`.
pub fn dirichlet_energy(u: &ScalarField, basis: &SpectralBasis) -> f64 {
    crate::spectral::h1_inner(u, u, basis) - crate::spectral::l2_scalar(u, u, basis)
}

/// `∫ ⟨Dψ, ψ⟩ = Σ λ |c|²`.
pub fn dirac_form(psi: &SpinorField, basis: &SpectralBasis) -> f64 {
    psi.coeffs
        .iter()
        .zip(basis.slot_lambda())
        .map(|(c, l)| l * c.norm_sqr())
        .sum()
}

pub fn evaluate_j(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<f64> {
    check(u, psi, params, basis)?;
    let rho = params.rho;
    let pg = point_grid(u, psi, basis);
    let pot: Vec<f64> = (0..pg.cosh.len())
        .map(|i| -8.0 * rho * pg.cosh[i] * pg.density[i] + 4.0 * rho * rho * pg.sinh[i] * pg.sinh[i])
        .collect();
    Ok(dirichlet_energy(u, basis) + 8.0 * dirac_form(psi, basis) + basis.integrate(&pot))
}

/// First variation as L² densities (`Dual` representation).
pub fn gradient_j(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<Variation> {
    check(u, psi, params, basis)?;
    let rho = params.rho;
    let pg = point_grid(u, psi, basis);
    let local: Vec<f64> = (0..pg.cosh.len())
        .map(|i| 8.0 * rho * rho * pg.sinh[i] * pg.cosh[i] - 8.0 * rho * pg.sinh[i] * pg.density[i])
        .collect();
    let mut du = basis.scalar_from_grid(local)?;
    du.axpy(1.0, &scalar_multiplier(u, basis, |x| 2.0 * x));
    let mut dpsi = dirac_diag(psi, basis);
    dpsi.axpy(-rho, &basis.mul_pointwise(psi, &pg.cosh));
    Ok(Variation {
        du,
        dpsi: dpsi.scaled(16.0),
        repr: Representation::Dual,
    })
}

/// Second variation at `(u, ψ)` applied to the direction `(w, χ)`, in `Dual` form.
pub fn hess_vec(
    u: &ScalarField,
    psi: &SpinorField,
    w: &ScalarField,
    chi: &SpinorField,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<Variation> {
    check(u, psi, params, basis)?;
    basis.check_scalar(w)?;
    basis.check_spinor(chi)?;
    let rho = params.rho;
    let pg = point_grid(u, psi, basis);
    let pairing = basis.spinor_pairing(psi, chi);
    let local: Vec<f64> = (0..pg.cosh.len())
        .map(|i| {
            let c2 = pg.cosh[i] * pg.cosh[i] + pg.sinh[i] * pg.sinh[i];
            (8.0 * rho * rho * c2 - 8.0 * rho * pg.cosh[i] * pg.density[i]) * w.values[i]
                - 16.0 * rho * pg.sinh[i] * pairing[i]
        })
        .collect();
    let mut du = basis.scalar_from_grid(local)?;
    du.axpy(1.0, &scalar_multiplier(w, basis, |x| 2.0 * x));

    let mut dpsi = dirac_diag(chi, basis);
    dpsi.axpy(-rho, &basis.mul_pointwise(chi, &pg.cosh));
    let sw: Vec<f64> = pg.sinh.iter().zip(&w.values).map(|(s, w)| s * w).collect();
    dpsi.axpy(-rho, &basis.mul_pointwise(psi, &sw));
    Ok(Variation {
        du,
        dpsi: dpsi.scaled(16.0),
        repr: Representation::Dual,
    })
}

/// Residuals of `Δu = 2ρ² sinh(2u) − 4ρ sinh(u)|ψ|²` and `Dψ = ρ cosh(u) ψ`.
#[derive(Debug, Clone)]
pub struct ElResidual {
    /// `(−Δu + 2ρ² sinh 2u − 4ρ sinh u |ψ|², Dψ − ρ cosh u ψ)` as L² densities.
    pub residual: Variation,
    /// `H⁻¹` norm of the scalar equation residual.
    pub res_u: f64,
    /// `H^{-1/2}` norm of the spinor equation residual.
    pub res_psi: f64,
}

pub fn el_residual(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<ElResidual> {
    let g = gradient_j(u, psi, params, basis)?;
    let residual = Variation {
        du: g.du.scaled(0.5),
        dpsi: g.dpsi.scaled(1.0 / 16.0),
        repr: Representation::Dual,
    };
    let (res_u, res_psi) = residual.component_norms(basis);
    Ok(ElResidual {
        residual,
        res_u,
        res_psi,
    })
}
