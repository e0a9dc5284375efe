//! Mountain pass inside `{⟨u, u1⟩_{H¹} = 0}`, used when the equivariant level coincides with
//! the first one.

use serde::{Deserialize, Serialize};

use super::family::EquivariantFamily;
use crate::action::{evaluate_j, ActionParams};
use crate::error::{Result, SolverError};
use crate::minmax::{
    build_path, minmax_deform, DeformOptions, DeformOutcome, MinmaxConfig, OrthogonalConstraint, SolutionRecord,
    ORTHOGONAL_TOL,
};
use crate::nehari::fiber_solve;
use crate::spectral::{h1_inner, ScalarField, SpectralBasis};

const BISECTION_STEPS: usize = 60;

/// `|c₂ − c₁|` at or below which the restart is used.
pub const DEGENERATE_LEVEL_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalAngle {
    pub theta0: f64,
    /// `⟨u1, u_{θ₀}⟩_{H¹}` before the exact projection.
    pub inner: f64,
}

/// `θ₀ ∈ [0, π]` with `⟨u1, χ(θ₀, ·)ū⟩_{H¹} = 0`. The loop samples give a sign change because
/// the inner product flips sign under `θ ↦ θ + π`; it is then refined by bisection.
pub fn orthogonal_angle(u1: &ScalarField, family: &EquivariantFamily, basis: &SpectralBasis) -> Result<OrthogonalAngle> {
    let f = |theta: f64| -> Result<f64> {
        let u = family.chi.scaled_field(theta, family.u_bar, basis)?;
        Ok(h1_inner(u1, &u, basis))
    };
    let scale = h1_inner(u1, u1, basis).sqrt() * h1_inner(&family.points[0].u, &family.points[0].u, basis).sqrt();
    let zero = 1e-14 * scale.max(1e-300);
    let n = family.len();
    let vals: Vec<f64> = (0..=n / 2).map(|k| h1_inner(u1, &family.points[k].u, basis)).collect();
    if vals.iter().all(|v| v.abs() <= zero) {
        return Ok(OrthogonalAngle { theta0: 0.0, inner: vals[0] });
    }
    let mut bracket = None;
    for k in 0..n / 2 {
        if vals[k].abs() <= zero {
            return Ok(OrthogonalAngle {
                theta0: family.theta_grid[k],
                inner: vals[k],
            });
        }
        if vals[k].signum() != vals[k + 1].signum() {
            bracket = Some(k);
            break;
        }
    }
    let k = bracket.ok_or_else(|| {
        SolverError::Internal("no sign change of <u1, u_theta> over half the loop; the loop is not antisymmetric".into())
    })?;
    let (mut a, mut b) = (family.theta_grid[k], family.theta_grid[k + 1]);
    let mut fa = vals[k];
    let mut mid = 0.5 * (a + b);
    let mut fm = f(mid)?;
    for _ in 0..BISECTION_STEPS {
        if fm.abs() <= zero || b - a <= 1e-15 {
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        mid = 0.5 * (a + b);
        fm = f(mid)?;
    }
    Ok(OrthogonalAngle { theta0: mid, inner: fm })
}

#[derive(Debug, Clone)]
pub struct RestartRun {
    pub angle: OrthogonalAngle,
    pub endpoint_energy: f64,
    pub record: SolutionRecord,
    pub outcome: DeformOutcome,
}

/// Mountain pass from the origin to the loop point at `θ₀`, with every iterate kept
/// `H¹`-orthogonal to `u1`.
pub fn orthogonal_restart(
    u1: &ScalarField,
    family: &EquivariantFamily,
    cfg: &MinmaxConfig,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<RestartRun> {
    cfg.validate()?;
    let angle = orthogonal_angle(u1, family, basis)?;
    let constraint = OrthogonalConstraint::new(u1.clone());
    let u = constraint.restrict(&family.chi.scaled_field(angle.theta0, family.u_bar, basis)?, basis);
    let end = fiber_solve(&u, &family.spinor.scaled(family.s), params, basis)?;
    let endpoint_energy = evaluate_j(&end.u, &end.psi, params, basis)?;
    if !(endpoint_energy < 0.0) {
        return Err(SolverError::Parameter(format!(
            "orthogonal endpoint at theta = {} has J = {endpoint_energy}",
            angle.theta0
        )));
    }
    let origin = fiber_solve(&basis.scalar_zeros(), &basis.spinor_zeros(), params, basis)?;
    let mesh = build_path(&origin, &end, cfg.path_nodes, params, basis)?;
    let mut opts = DeformOptions::from_config(cfg);
    opts.orthogonal = Some(constraint.clone());
    let outcome = minmax_deform(mesh, params, basis, &opts)?;
    let inner = constraint.inner(&outcome.record.point.u, basis);
    if inner.abs() > ORTHOGONAL_TOL {
        return Err(SolverError::Internal(format!("restart left the orthogonal slice: <u, u1> = {inner:e}")));
    }
    Ok(RestartRun {
        angle,
        endpoint_energy,
        record: outcome.record.clone(),
        outcome,
    })
}
