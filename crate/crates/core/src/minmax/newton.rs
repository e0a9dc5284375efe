//! Damped Newton refinement of min-max candidates on the full Euler–Lagrange system.

use super::diagnostics::point_norms;
use super::{Classification, SolutionRecord};
use crate::action::{el_residual, gradient_j, hess_vec, ActionParams};
use crate::error::{Result, SolverError};
use crate::krylov::{minres, KrylovOptions};
use crate::nehari::{constrained_gradient, project_to_manifold, NehariPoint};
use crate::pair::FieldPair;
use crate::spectral::{hhalf_inner, riesz_h1, riesz_hhalf, ScalarField, SpectralBasis, SpinorField};

/// Gradient size below which a min-max candidate may be handed to Newton.
pub const NEWTON_HANDOFF: f64 = 1e-3;
const MAX_NEWTON: usize = 40;
const MAX_HALVINGS: usize = 10;

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub u: ScalarField,
    pub psi: SpinorField,
    pub res_u: f64,
    pub res_psi: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn merit(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<(f64, f64)> {
    let r = el_residual(u, psi, params, basis)?;
    Ok((r.res_u, r.res_psi))
}

/// Solve `d²J(x)[δ] = −dJ(x)` by MINRES preconditioned with the Riesz map. Returns the step
/// and `(iterations, converged)` of the linear solve.
pub(crate) fn newton_direction(
    x: &FieldPair,
    params: &ActionParams,
    basis: &SpectralBasis,
    rel_tol: f64,
) -> Result<(FieldPair, (usize, bool))> {
    let g = gradient_j(&x.u, &x.psi, params, basis)?;
    let rhs = FieldPair::new(g.du.neg(), g.dpsi.scaled(-1.0));
    let opts = KrylovOptions {
        rel_tol,
        abs_tol: 1e-16,
        max_iter: 800,
    };
    let sol = minres(
        |d: &FieldPair| {
            let h = hess_vec(&x.u, &x.psi, &d.u, &d.psi, params, basis).expect("checked operands");
            FieldPair::new(h.du, h.dpsi)
        },
        |r: &FieldPair| FieldPair::new(riesz_h1(&r.u, basis), riesz_hhalf(&r.psi, basis)),
        |a: &FieldPair, b: &FieldPair| a.dot_l2(b, basis),
        &rhs,
        &opts,
    )?;
    Ok((sol.x, (sol.iterations, sol.converged)))
}

/// Newton iteration for `dJ = 0` without reference to `N_ρ`. Linear systems are solved by
/// MINRES with the Riesz map as preconditioner; steps are halved until the residual drops.
pub fn newton_solve(
    u: &ScalarField,
    psi: &SpinorField,
    params: &ActionParams,
    basis: &SpectralBasis,
    tol: f64,
) -> Result<NewtonOutcome> {
    let mut x = FieldPair::new(u.clone(), psi.clone());
    let (mut ru, mut rp) = merit(&x.u, &x.psi, params, basis)?;
    let mut iterations = 0;
    while iterations < MAX_NEWTON {
        if ru <= tol && rp <= tol {
            break;
        }
        let m = ru.hypot(rp);
        let (dx, _) = newton_direction(&x, params, basis, (0.1 * m).clamp(1e-13, 1e-2))?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = x.clone();
            trial.axpy_pair(step, &dx);
            if params.guard(&trial.u).is_ok() {
                if let Ok((tu, tp)) = merit(&trial.u, &trial.psi, params, basis) {
                    if tu.hypot(tp) < m {
                        accepted = Some((trial, tu, tp));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((t, tu, tp)) => {
                x = t;
                ru = tu;
                rp = tp;
            }
            None => break,
        }
    }
    Ok(NewtonOutcome {
        converged: ru <= tol && rp <= tol,
        u: x.u,
        psi: x.psi,
        res_u: ru,
        res_psi: rp,
        iterations,
    })
}

/// Classification by size and by constancy of `u`, with the grid variance of `u`.
pub fn classify(u: &ScalarField, psi: &SpinorField, basis: &SpectralBasis) -> (Classification, f64) {
    let un = crate::spectral::h1_inner(u, u, basis).max(0.0).sqrt();
    let pn = hhalf_inner(psi, psi, basis).max(0.0).sqrt();
    let var = u.variance();
    let class = if un + pn <= 1e-8 {
        Classification::Trivial
    } else if var <= 1e-8 && pn > 1e-8 {
        Classification::SemiTrivialConstantU
    } else {
        Classification::Nontrivial
    };
    (class, var)
}

/// Distance from `ρ cosh(mean u)` to the nearest computed Dirac eigenvalue magnitude.
pub fn semi_trivial_gap(u: &ScalarField, params: &ActionParams, basis: &SpectralBasis) -> f64 {
    let target = params.rho * u.mean().cosh();
    basis
        .slot_lambda()
        .iter()
        .map(|l| (l.abs() - target).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Assemble a record with residuals, classification and Palais–Smale quantities at `point`.
pub(crate) fn make_record(
    point: NehariPoint,
    params: &ActionParams,
    basis: &SpectralBasis,
    refined: bool,
    newton_iterations: usize,
) -> Result<SolutionRecord> {
    let res = el_residual(&point.u, &point.psi, params, basis)?;
    let cg = constrained_gradient(&point, params, basis)?;
    let level = crate::action::evaluate_j(&point.u, &point.psi, params, basis)?;
    let (classification, u_variance) = classify(&point.u, &point.psi, basis);
    let (u_norm, psi_norm) = point_norms(&point, basis);
    let phi = &cg.multiplier.varphi;
    Ok(SolutionRecord {
        level,
        res_u: res.res_u,
        res_psi: res.res_psi,
        classification,
        u_variance,
        u_norm,
        psi_norm,
        grad_norm: cg.norm,
        multiplier_norm: hhalf_inner(phi, phi, basis).max(0.0).sqrt(),
        alpha_norm: cg.alpha_norm,
        beta_norm: cg.beta_norm,
        refined,
        newton_iterations,
        point,
    })
}

/// Sharpen a min-max candidate to a solution of the Euler–Lagrange system. A candidate whose
/// Newton iteration stalls is returned unchanged with `refined = false`.
pub fn newton_refine(
    candidate: &NehariPoint,
    params: &ActionParams,
    basis: &SpectralBasis,
    newton_tol: f64,
) -> Result<SolutionRecord> {
    // ‖constrained gradient‖ ≤ ‖free gradient‖, so the cheap bound is tried first.
    let free = gradient_j(&candidate.u, &candidate.psi, params, basis)?.norm(basis);
    if free > NEWTON_HANDOFF {
        let cg = constrained_gradient(candidate, params, basis)?;
        if cg.norm > NEWTON_HANDOFF {
            return Err(SolverError::Precondition(format!(
                "constrained gradient norm {:.3e} exceeds the Newton handoff {NEWTON_HANDOFF:e}",
                cg.norm
            )));
        }
    }
    let out = newton_solve(&candidate.u, &candidate.psi, params, basis, newton_tol)?;
    if !out.converged {
        return make_record(candidate.clone(), params, basis, false, out.iterations);
    }
    let point = project_to_manifold(&out.u, &out.psi, params, basis)?;
    let rec = make_record(point, params, basis, true, out.iterations)?;
    let refined = rec.res_u <= newton_tol && rec.res_psi <= newton_tol;
    Ok(SolutionRecord { refined, ..rec })
}
