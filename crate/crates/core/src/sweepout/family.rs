//! The ℤ₂-equivariant loop `θ ↦ (χ(θ, ·)ū, ψ_θ)` on `N_ρ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::chi::{build_sweepout_chi, SweepoutChi};
use crate::action::{evaluate_j, ActionParams};
use crate::error::{Result, SolverError};
use crate::nehari::{fiber_solve_warm, NehariPoint};
use crate::spectral::{SpectralBasis, SpinorField};

/// Extra certification attempts after the first one.
pub const FAMILY_RETRIES: usize = 3;

#[derive(Debug, Clone)]
pub struct EquivariantFamily {
    /// Uniform samples `2πk/n` of `[0, 2π)`.
    pub theta_grid: Vec<f64>,
    pub points: Vec<NehariPoint>,
    pub energies: Vec<f64>,
    /// Constraint residual of each fiber solve.
    pub continuation_residuals: Vec<f64>,
    pub u_bar: f64,
    pub s: f64,
    /// Unit-`L²` spinor whose multiple `s·spinor` is the free part along the loop.
    pub spinor: SpinorField,
    pub chi: SweepoutChi,
    /// Certification attempts used, starting at 1.
    pub attempts: usize,
}

/// Energies of the loop split as `J(u_θ, ψ_θ) = E_θ + s²Q_θ`, which holds because the fiber
/// solution is linear in the free spinor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyBound {
    pub max_energy: f64,
    pub argmax_theta: f64,
    /// Smallest `s` with `E_θ + s²Q_θ < 0` for all sampled `θ`, when every `Q_θ < 0`.
    pub s_required: Option<f64>,
}

impl EquivariantFamily {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_θ ‖(u_{θ+π} + u_θ, ψ_{θ+π} − ψ_θ)‖_∞` over the sampled loop.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.len();
        (0..n / 2)
            .map(|k| {
                let (a, b) = (&self.points[k], &self.points[k + n / 2]);
                let du = a.u.values.iter().zip(&b.u.values).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
                du.max(a.psi.sub(&b.psi).max_abs_coeff())
            })
            .fold(0.0, f64::max)
    }
}

fn sample_loop(
    u_bar: f64,
    s: f64,
    spinor: &SpinorField,
    chi: &SweepoutChi,
    params: &ActionParams,
    basis: &SpectralBasis,
    n_theta: usize,
) -> Result<(Vec<NehariPoint>, Vec<f64>, FamilyBound)> {
    let free = spinor.scaled(s);
    let half = n_theta / 2;
    let mut points: Vec<NehariPoint> = Vec::with_capacity(n_theta);
    let mut energies = Vec::with_capacity(n_theta);
    let mut quad = Vec::with_capacity(half);
    for k in 0..half {
        let theta = 2.0 * PI * k as f64 / n_theta as f64;
        let u = if k == 0 {
            basis.scalar_constant(u_bar)
        } else {
            chi.scaled_field(theta, u_bar, basis)?
        };
        let warm = points.last().map(|p| &p.split.minus);
        let p = fiber_solve_warm(&u, &free, warm, params, basis)?;
        let j = evaluate_j(&p.u, &p.psi, params, basis)?;
        let e0 = evaluate_j(&p.u, &basis.spinor_zeros(), params, basis)?;
        quad.push((theta, e0, (j - e0) / (s * s)));
        energies.push(j);
        points.push(p);
    }
    // cosh is even, so the fiber over −u_θ is the fiber over u_θ.
    for k in 0..half {
        let p = &points[k];
        points.push(NehariPoint {
            u: p.u.neg(),
            psi: p.psi.clone(),
            split: p.split.clone(),
            constraint_norm: p.constraint_norm,
        });
        energies.push(energies[k]);
    }
    let (mut max_energy, mut argmax_theta) = (f64::NEG_INFINITY, 0.0);
    for (k, &(theta, _, _)) in quad.iter().enumerate() {
        if energies[k] > max_energy {
            max_energy = energies[k];
            argmax_theta = theta;
        }
    }
    let s_required = if quad.iter().all(|q| q.2 < 0.0) {
        Some(quad.iter().map(|&(_, e, q)| (e.max(0.0) / -q).sqrt()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok((
        points,
        energies,
        FamilyBound {
            max_energy,
            argmax_theta,
            s_required,
        },
    ))
}

/// Loop with free part `s·spinor`, certified to satisfy `max_θ J < 0`.
///
/// A failed certificate is retried up to [`FAMILY_RETRIES`] times: `s` is raised to 1.5 times
/// the value the split `E_θ + s²Q_θ` requires, and when some `Q_θ ≥ 0` the plateau value `ū`
/// is raised by `0.5` and `ε` halved where the grid resolves it.
pub fn equivariant_family_along(
    u_bar: f64,
    s: f64,
    spinor: &SpinorField,
    chi: &SweepoutChi,
    params: &ActionParams,
    basis: &SpectralBasis,
    n_theta: usize,
) -> Result<EquivariantFamily> {
    if n_theta < 32 || n_theta % 2 != 0 {
        return Err(SolverError::Config(format!("n_theta must be even and >= 32, got {n_theta}")));
    }
    if !(u_bar > 0.0 && s > 0.0) {
        return Err(SolverError::Config(format!("u_bar and s must be positive, got {u_bar}, {s}")));
    }
    let (mut u_bar, mut s, mut chi) = (u_bar, s, chi.clone());
    let mut last = None;
    for attempt in 0..=FAMILY_RETRIES {
        let (points, energies, bound) = sample_loop(u_bar, s, spinor, &chi, params, basis, n_theta)?;
        if bound.max_energy < 0.0 {
            return Ok(EquivariantFamily {
                theta_grid: (0..n_theta).map(|k| 2.0 * PI * k as f64 / n_theta as f64).collect(),
                continuation_residuals: points.iter().map(|p| p.constraint_norm).collect(),
                points,
                energies,
                u_bar,
                s,
                spinor: spinor.clone(),
                chi,
                attempts: attempt + 1,
            });
        }
        last = Some(bound);
        match bound.s_required {
            Some(req) => s = (1.5 * s).max(1.5 * req),
            None => {
                u_bar += 0.5;
                s *= 1.5;
                if let Ok(c) = build_sweepout_chi(basis.geometry(), 0.5 * chi.epsilon) {
                    chi = c;
                }
            }
        }
    }
    let b = last.expect("at least one attempt");
    Err(SolverError::Parameter(format!(
        "sweepout loop not certified after {FAMILY_RETRIES} retries: J = {} at theta = {}",
        b.max_energy, b.argmax_theta
    )))
}

/// Loop through the mountain-pass endpoint `(ū, sΨ₁)` and its mirror `(−ū, sΨ₁)`.
pub fn equivariant_family(
    u_bar: f64,
    s: f64,
    chi: &SweepoutChi,
    params: &ActionParams,
    basis: &SpectralBasis,
    n_theta: usize,
) -> Result<EquivariantFamily> {
    let psi1 = basis
        .eigenspinor(1)
        .ok_or_else(|| SolverError::Resolution("no positive eigenvalue below the cutoff".into()))?;
    equivariant_family_along(u_bar, s, &psi1, chi, params, basis, n_theta)
}
