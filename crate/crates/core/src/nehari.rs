//! The Nehari-type manifold `N_ρ = {G(u, ψ) = 0}` with
//! `G(u, ψ) = P⁻(1 + |D|)⁻¹(Dψ − ρ cosh(u) ψ)`.
//!
//! Free coordinates are `(u, ψ⁺ + ψ⁰)`; the negative part `ψ⁻` is slaved through the fiber
//! solve. Riesz representatives use the product metric `H¹ × H^{1/2}`.

use crate::action::{gradient_j, ActionParams, Representation, Variation};
use crate::error::{Result, SolverError};
use crate::krylov::{pcg, KrylovOptions};
use crate::pair::FieldPair;
use crate::spectral::{
    dirac_diag, hhalf_inner, hm1_inner, hmhalf_inner, project_unchecked, riesz_h1, riesz_hhalf, spinor_multiplier,
    ScalarField, SpectralBasis, SpinorField, Subspace,
};

/// Certification threshold on `‖G‖_{H^{1/2}}`, for free spinors of `H^{1/2}` norm up to one;
/// larger spinors are certified against `CERT_TOL · ‖ψ_free‖_{H^{1/2}}`.
pub const CERT_TOL: f64 = 1e-10;

fn cert_scale(free: &SpinorField, basis: &SpectralBasis) -> f64 {
    hhalf_inner(free, free, basis).max(0.0).sqrt().max(1.0)
}

/// Tangency threshold on `‖dG[t]‖_{H^{1/2}}` for constrained gradients.
pub const TANGENCY_TOL: f64 = 1e-9;

const MAX_RESTARTS: usize = 4;

/// Spectral split `ψ = ψ⁺_a + ψ⁺_b + ψ⁰ + ψ⁻` relative to `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorSplit {
    pub plus_a: SpinorField,
    pub plus_b: SpinorField,
    pub zero: SpinorField,
    pub minus: SpinorField,
}

impl SpinorSplit {
    pub fn compute(psi: &SpinorField, rho: f64, basis: &SpectralBasis) -> Result<Self> {
        basis.check_rho(rho)?;
        Ok(Self {
            plus_a: project_unchecked(psi, Subspace::PlusA, basis, rho),
            plus_b: project_unchecked(psi, Subspace::PlusB, basis, rho),
            zero: project_unchecked(psi, Subspace::Zero, basis, rho),
            minus: project_unchecked(psi, Subspace::Minus, basis, rho),
        })
    }

    /// `ψ⁺ + ψ⁰`.
    pub fn free(&self) -> SpinorField {
        self.plus_a.add(&self.plus_b).add(&self.zero)
    }
}

/// A pair `(u, ψ)` certified to satisfy `G(u, ψ) = 0` within [`CERT_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct NehariPoint {
    pub u: ScalarField,
    pub psi: SpinorField,
    pub split: SpinorSplit,
    pub constraint_norm: f64,
}

impl NehariPoint {
    pub fn pair(&self) -> FieldPair {
        FieldPair::new(self.u.clone(), self.psi.clone())
    }
}

/// Lagrange multiplier `φ ∈ H^{1/2,−}` in the normalization `dJ = 16⟨dG, φ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierData {
    pub varphi: SpinorField,
    /// Relative residual of the normal equations defining the multiplier.
    pub solve_residual: f64,
    pub iterations: usize,
}

/// Constrained gradient together with the Palais–Smale test quantities.
#[derive(Debug, Clone)]
pub struct ConstrainedGradient {
    /// Riesz representative in `H¹ × H^{1/2}` of `dJ` restricted to `ker dG`.
    pub tangent: Variation,
    pub norm: f64,
    pub multiplier: MultiplierData,
    /// `H⁻¹` norm of `−2Δu + 4ρ² sinh 2u − 8ρ sinh u |ψ|² + 16ρ sinh u ⟨ψ, φ⟩`.
    pub alpha_norm: f64,
    /// `H^{-1/2}` norm of `(D − ρ cosh u)(ψ − φ)`.
    pub beta_norm: f64,
    /// `‖dG[tangent]‖_{H^{1/2}}`.
    pub tangency: f64,
}

/// The linear operator `ψ ↦ (D − ρ cosh u) ψ` at fixed `u`, with helpers for `N_ρ`.
pub struct FiberOperator<'a> {
    basis: &'a SpectralBasis,
    rho: f64,
    cosh: Vec<f64>,
    sinh: Vec<f64>,
    mean_cosh: f64,
}

impl<'a> FiberOperator<'a> {
    pub fn new(u: &ScalarField, params: &ActionParams, basis: &'a SpectralBasis) -> Result<Self> {
        basis.check_scalar(u)?;
        params.guard(u)?;
        let cosh: Vec<f64> = u.values.iter().map(|v| v.cosh()).collect();
        let mean_cosh = cosh.iter().sum::<f64>() / cosh.len() as f64;
        Ok(Self {
            basis,
            rho: params.rho,
            sinh: u.values.iter().map(|v| v.sinh()).collect(),
            cosh,
            mean_cosh,
        })
    }

    /// `(D − ρ cosh u) ψ` as an L² density.
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let mut out = dirac_diag(psi, self.basis);
        out.axpy(-self.rho, &self.basis.mul_pointwise(psi, &self.cosh));
        out
    }

    fn minus(&self, psi: &SpinorField) -> SpinorField {
        project_unchecked(psi, Subspace::Minus, self.basis, self.rho)
    }

    /// `−P⁻(D − ρ cosh u)P⁻`, positive definite on the negative subspace.
    fn apply_fiber(&self, x: &SpinorField) -> SpinorField {
        self.minus(&self.apply(&self.minus(x))).scaled(-1.0)
    }

    fn precond(&self, r: &SpinorField) -> SpinorField {
        riesz_hhalf(r, self.basis)
    }

    /// `G(u, ψ)`.
    pub fn constraint(&self, psi: &SpinorField) -> SpinorField {
        riesz_hhalf(&self.minus(&self.apply(psi)), self.basis)
    }

    /// `dG[v, ϕ] = P⁻(1 + |D|)⁻¹((D − ρ cosh u)ϕ − ρ sinh(u) v ψ)`.
    pub fn linearized(&self, psi: &SpinorField, v: &ScalarField, phi: &SpinorField) -> SpinorField {
        let mut out = self.apply(phi);
        let sv: Vec<f64> = self.sinh.iter().zip(&v.values).map(|(s, v)| s * v).collect();
        out.axpy(-self.rho, &self.basis.mul_pointwise(psi, &sv));
        riesz_hhalf(&self.minus(&out), self.basis)
    }

    /// Adjoint of [`linearized`](Self::linearized) from `H^{1/2,−}` into `H¹ × H^{1/2}`.
    pub fn linearized_adjoint(&self, psi: &SpinorField, mu: &SpinorField) -> FieldPair {
        let pairing = self.basis.spinor_pairing(psi, mu);
        let density: Vec<f64> = self
            .sinh
            .iter()
            .zip(&pairing)
            .map(|(s, p)| -self.rho * s * p)
            .collect();
        FieldPair {
            u: riesz_h1(&ScalarField { values: density }, self.basis),
            psi: riesz_hhalf(&self.apply(mu), self.basis),
        }
    }

    /// Solve for the `ψ⁻` that puts `free + ψ⁻` on the fiber.
    pub fn solve_minus(&self, free: &SpinorField, warm: Option<&SpinorField>) -> Result<(SpinorField, f64)> {
        let rhs = self.minus(&self.apply(free));
        let dot = |a: &SpinorField, b: &SpinorField| a.dot_l2(b);
        let rhs_norm = hmhalf_inner(&rhs, &rhs, self.basis).sqrt();
        if rhs_norm == 0.0 && warm.is_none() {
            return Ok((self.basis.spinor_zeros(), 0.0));
        }
        let target = (1e-12 * rhs_norm).min(0.1 * CERT_TOL * cert_scale(free, self.basis)).max(1e-15);
        let mut x = warm.map(|w| self.minus(w)).unwrap_or_else(|| self.basis.spinor_zeros());
        let mut last = f64::INFINITY;
        for _ in 0..=MAX_RESTARTS {
            let mut r = rhs.clone();
            r.axpy(-1.0, &self.apply_fiber(&x));
            let res = hmhalf_inner(&r, &r, self.basis).sqrt();
            last = res;
            if res <= target {
                return Ok((x, res));
            }
            let opts = KrylovOptions {
                rel_tol: (target / res).min(1e-12),
                abs_tol: 0.5 * target,
                max_iter: 500,
            };
            let out = pcg(|p| self.apply_fiber(p), |q| self.precond(q), dot, &r, None, &opts);
            if !out.converged && out.residual > target {
                return Err(SolverError::Conditioning {
                    iterations: out.iterations,
                    residual: out.residual,
                });
            }
            x.axpy(1.0, &out.x);
        }
        Err(SolverError::Conditioning {
            iterations: 500 * (MAX_RESTARTS + 1),
            residual: last,
        })
    }

    /// Quadratic form `⟨(D − ρ cosh u)φ, φ⟩ / ‖φ‖²_{H^{1/2}}` on `H^{1/2,−}`.
    pub fn rayleigh_quotient(&self, phi: &SpinorField) -> f64 {
        let m = self.minus(phi);
        self.apply(&m).dot_l2(&m) / hhalf_inner(&m, &m, self.basis)
    }

    /// `X`-orthogonal projection of `w` onto `ker dG` at `(u, ψ)`; returns the projection and
    /// the multiplier `μ` with `w − proj = dG* μ`.
    pub fn tangent_project(&self, psi: &SpinorField, w: &FieldPair) -> Result<(FieldPair, SpinorField, f64, usize)> {
        let rhs = self.linearized(psi, &w.u, &w.psi);
        let rhs_norm = hhalf_inner(&rhs, &rhs, self.basis).sqrt();
        if rhs_norm == 0.0 {
            return Ok((w.clone(), self.basis.spinor_zeros(), 0.0, 0));
        }
        let apply = |m: &SpinorField| {
            let a = self.linearized_adjoint(psi, m);
            self.linearized(psi, &a.u, &a.psi)
        };
        let rho = self.rho;
        let c = self.mean_cosh;
        let precond = |r: &SpinorField| {
            spinor_multiplier(r, self.basis, |lam, _| {
                let d = (lam.abs() + rho * c) / (1.0 + lam.abs());
                1.0 / (d * d)
            })
        };
        let dot = |a: &SpinorField, b: &SpinorField| hhalf_inner(a, b, self.basis);
        let opts = KrylovOptions {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            max_iter: 500,
        };
        let mut mu = self.basis.spinor_zeros();
        let mut iterations = 0;
        let mut rel = f64::INFINITY;
        for _ in 0..=MAX_RESTARTS {
            let mut r = rhs.clone();
            r.axpy(-1.0, &apply(&mu));
            rel = hhalf_inner(&r, &r, self.basis).sqrt() / rhs_norm.max(1.0);
            if rel <= 1e-12 {
                break;
            }
            let out = pcg(&apply, &precond, dot, &r, None, &opts);
            iterations += out.iterations;
            mu.axpy(1.0, &out.x);
        }
        if rel > 1e-10 {
            return Err(SolverError::Conditioning {
                iterations,
                residual: rel,
            });
        }
        let adj = self.linearized_adjoint(psi, &mu);
        Ok((w.sub(&adj), mu, rel, iterations))
    }
}

fn check_free(psi_free: &SpinorField, rho: f64, basis: &SpectralBasis) -> Result<()> {
    let minus = project_unchecked(psi_free, Subspace::Minus, basis, rho);
    let m = minus.norm_l2();
    if m > 1e-13 * (1.0 + psi_free.norm_l2()) {
        return Err(SolverError::Precondition(format!(
            "free spinor has a negative-subspace component of L² size {m:e}"
        )));
    }
    Ok(())
}

pub fn constraint_g(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<SpinorField> {
    basis.check_spinor(psi)?;
    Ok(FiberOperator::new(u, params, basis)?.constraint(psi))
}

pub fn constraint_norm(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<f64> {
    let g = constraint_g(u, psi, params, basis)?;
    Ok(hhalf_inner(&g, &g, basis).sqrt())
}

/// Complete `psi_free ∈ H^{1/2,+} ⊕ H^{1/2,0}` to a point of the fiber `N_{ρ,u}`.
pub fn fiber_solve(u: &ScalarField, psi_free: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<NehariPoint> {
    fiber_solve_warm(u, psi_free, None, params, basis)
}

/// [`fiber_solve`] with an initial guess for `ψ⁻`.
pub fn fiber_solve_warm(
    u: &ScalarField,
    psi_free: &SpinorField,
    warm: Option<&SpinorField>,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<NehariPoint> {
    basis.check_spinor(psi_free)?;
    basis.check_rho(params.rho)?;
    check_free(psi_free, params.rho, basis)?;
    let op = FiberOperator::new(u, params, basis)?;
    let (minus, _) = op.solve_minus(psi_free, warm)?;
    certify(&op, u.clone(), psi_free.add(&minus), params, basis)
}

fn certify(op: &FiberOperator<'_>, u: ScalarField, psi: SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<NehariPoint> {
    let g = op.constraint(&psi);
    let constraint_norm = hhalf_inner(&g, &g, basis).sqrt();
    let split = SpinorSplit::compute(&psi, params.rho, basis)?;
    if !(constraint_norm <= CERT_TOL * cert_scale(&split.free(), basis)) {
        return Err(SolverError::Conditioning {
            iterations: 0,
            residual: constraint_norm,
        });
    }
    Ok(NehariPoint {
        split,
        u,
        psi,
        constraint_norm,
    })
}

/// Retraction onto `N_ρ`: keep `u` and the non-negative part of `ψ`, re-solve `ψ⁻`.
pub fn project_to_manifold(u: &ScalarField, psi: &SpinorField, params: &ActionParams, basis: &SpectralBasis) -> Result<NehariPoint> {
    basis.check_spinor(psi)?;
    basis.check_rho(params.rho)?;
    let minus = project_unchecked(psi, Subspace::Minus, basis, params.rho);
    let free = psi.sub(&minus);
    let op = FiberOperator::new(u, params, basis)?;
    let (m, _) = op.solve_minus(&free, Some(&minus))?;
    certify(&op, u.clone(), free.add(&m), params, basis)
}

pub fn lagrange_multiplier(point: &NehariPoint, params: &ActionParams, basis: &SpectralBasis) -> Result<MultiplierData> {
    Ok(constrained_gradient(point, params, basis)?.multiplier)
}

pub fn constrained_gradient(point: &NehariPoint, params: &ActionParams, basis: &SpectralBasis) -> Result<ConstrainedGradient> {
    let g = gradient_j(&point.u, &point.psi, params, basis)?;
    constrained_from_gradient(point, &g, params, basis)
}

/// Constrained gradient for an arbitrary dual-form gradient `g` (used with penalized functionals).
pub fn constrained_from_gradient(
    point: &NehariPoint,
    g: &Variation,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<ConstrainedGradient> {
    let op = FiberOperator::new(&point.u, params, basis)?;
    let kg = g.to_riesz(basis);
    let w = FieldPair::new(kg.du, kg.dpsi);
    let (t, mu, solve_residual, iterations) = op.tangent_project(&point.psi, &w)?;
    let lt = op.linearized(&point.psi, &t.u, &t.psi);
    let tangency = hhalf_inner(&lt, &lt, basis).sqrt();
    let varphi = mu.scaled(1.0 / 16.0);

    // Dual form of the tangent vector: (α, 16β).
    let pairing = basis.spinor_pairing(&point.psi, &mu);
    let sinh: Vec<f64> = point.u.values.iter().map(|v| v.sinh()).collect();
    let dens: Vec<f64> = sinh.iter().zip(&pairing).map(|(s, p)| params.rho * s * p).collect();
    let mut alpha = g.du.clone();
    alpha.axpy(1.0, &basis.scalar_from_grid(dens)?);
    let alpha_norm = hm1_inner(&alpha, &alpha, basis).max(0.0).sqrt();
    let beta = op.apply(&point.psi.sub(&varphi));
    let beta_norm = hmhalf_inner(&beta, &beta, basis).max(0.0).sqrt();

    let tangent = Variation {
        du: t.u,
        dpsi: t.psi,
        repr: Representation::Riesz,
    };
    let norm = tangent.norm(basis);
    Ok(ConstrainedGradient {
        tangent,
        norm,
        multiplier: MultiplierData {
            varphi,
            solve_residual,
            iterations,
        },
        alpha_norm,
        beta_norm,
        tangency,
    })
}

/// `X`-orthogonal projection of a direction onto the tangent space of `N_ρ` at `point`.
pub fn tangent_project(point: &NehariPoint, w: &FieldPair, params: &ActionParams, basis: &SpectralBasis) -> Result<FieldPair> {
    let op = FiberOperator::new(&point.u, params, basis)?;
    Ok(op.tangent_project(&point.psi, w)?.0)
}

/// `‖dG[w]‖_{H^{1/2}}` at `point`.
pub fn tangency_defect(point: &NehariPoint, w: &FieldPair, params: &ActionParams, basis: &SpectralBasis) -> Result<f64> {
    let op = FiberOperator::new(&point.u, params, basis)?;
    let l = op.linearized(&point.psi, &w.u, &w.psi);
    Ok(hhalf_inner(&l, &l, basis).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{project, TorusGeometry};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis() -> SpectralBasis {
        SpectralBasis::build_full(TorusGeometry::standard(16, [0.5, 0.5]).unwrap()).unwrap()
    }

    fn random_u(b: &SpectralBasis, rng: &mut ChaCha8Rng, amp: f64) -> ScalarField {
        let a: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-amp..amp));
        b.scalar_from_fn(|x| a[0] + a[1] * x[0].sin() + a[2] * x[1].cos() + a[3] * (x[0] - x[1]).cos() + a[4] * (2.0 * x[0]).sin())
    }

    fn random_free(b: &SpectralBasis, rng: &mut ChaCha8Rng) -> SpinorField {
        let mut psi = b.spinor_zeros();
        for (slot, lam) in b.slot_lambda().iter().enumerate() {
            if *lam >= 0.0 && *lam < 4.0 {
                psi.coeffs[slot] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        psi
    }

    #[test]
    fn constraint_examples() {
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let z = b.scalar_zeros();
        let g = constraint_g(&z, &b.eigenspinor(1).unwrap(), &p, &b).unwrap();
        assert!(g.norm_l2() < 1e-14);
        let psi = b.eigenspinor(-1).unwrap();
        let g = constraint_g(&z, &psi, &p, &b).unwrap();
        let lam = b.eigenvalue(-1).unwrap();
        let want = psi.scaled((lam - 0.5) / (1.0 + lam.abs()));
        assert!(g.sub(&want).norm_l2() < 1e-14);
    }

    #[test]
    fn fiber_solve_certifies_and_is_linear_and_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let u = random_u(&b, &mut rng, 0.8);
        let f1 = random_free(&b, &mut rng);
        let f2 = random_free(&b, &mut rng);
        let a = fiber_solve(&u, &f1, &p, &b).unwrap();
        let c = fiber_solve(&u, &f2, &p, &b).unwrap();
        assert!(a.constraint_norm <= CERT_TOL);
        let comb = fiber_solve(&u, &f1.scaled(2.0).add(&f2.scaled(-0.5)), &p, &b).unwrap();
        let lin = a.split.minus.scaled(2.0).add(&c.split.minus.scaled(-0.5));
        assert!(comb.split.minus.sub(&lin).norm_l2() < 1e-10);
        let neg = fiber_solve(&u.neg(), &f1, &p, &b).unwrap();
        assert_eq!(neg.psi, a.psi);
        let zero = fiber_solve(&b.scalar_zeros(), &f1, &p, &b).unwrap();
        assert!(zero.split.minus.norm_l2() < 1e-12);
    }

    #[test]
    fn fiber_requires_free_input() {
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let psi = b.eigenspinor(-1).unwrap();
        assert!(matches!(
            fiber_solve(&b.scalar_zeros(), &psi, &p, &b),
            Err(SolverError::Precondition(_))
        ));
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let u = random_u(&b, &mut rng, 1.0);
        let mut psi = random_free(&b, &mut rng);
        psi.axpy(1.0, &b.eigenspinor(-2).unwrap());
        let once = project_to_manifold(&u, &psi, &p, &b).unwrap();
        let twice = project_to_manifold(&once.u, &once.psi, &p, &b).unwrap();
        assert!(once.psi.sub(&twice.psi).norm_l2() < 1e-10);
        let z = b.scalar_zeros();
        let e = b.eigenspinor(1).unwrap();
        let q = project_to_manifold(&z, &e.add(&b.eigenspinor(-1).unwrap()), &p, &b).unwrap();
        assert!(q.psi.sub(&e).norm_l2() < 1e-12);
    }

    #[test]
    fn constrained_gradient_is_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        for _ in 0..3 {
            let u = random_u(&b, &mut rng, 0.7);
            let pt = fiber_solve(&u, &random_free(&b, &mut rng), &p, &b).unwrap();
            let cg = constrained_gradient(&pt, &p, &b).unwrap();
            assert!(cg.tangency <= TANGENCY_TOL, "{}", cg.tangency);
            assert!(cg.multiplier.solve_residual <= 1e-10);
            let minus = project(&cg.multiplier.varphi, Subspace::Minus, &b, 0.5).unwrap();
            assert_eq!(minus, cg.multiplier.varphi);
            // the tangent component is the X-projection of the Riesz gradient
            let g = gradient_j(&pt.u, &pt.psi, &p, &b).unwrap().to_riesz(&b);
            let t = FieldPair::new(cg.tangent.du.clone(), cg.tangent.dpsi.clone());
            let full = FieldPair::new(g.du, g.dpsi);
            let dn = full.sub(&t);
            assert!(t.dot_x(&dn, &b).abs() <= 1e-9 * full.norm_x(&b).powi(2));
        }
    }

    #[test]
    fn constrained_gradient_at_origin_direction() {
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let t = 0.3;
        let e = b.eigenspinor(1).unwrap();
        let pt = fiber_solve(&b.scalar_zeros(), &e.scaled(t), &p, &b).unwrap();
        let cg = constrained_gradient(&pt, &p, &b).unwrap();
        let lam = b.eigenvalue(1).unwrap();
        let want = e.scaled(16.0 * (lam - 0.5) * t / (1.0 + lam));
        assert!(cg.tangent.dpsi.sub(&want).norm_l2() < 1e-12);
        assert!(cg.tangent.du.max_abs() < 1e-12);
        assert!(cg.multiplier.varphi.norm_l2() < 1e-12);
    }

    #[test]
    fn multiplier_vanishes_at_resonant_eigenspinor() {
        let b = basis();
        let lam = b.eigenvalue(1).unwrap();
        let p = ActionParams::new(lam - 1e-3).unwrap();
        let pt = fiber_solve(&b.scalar_zeros(), &b.eigenspinor(1).unwrap(), &p, &b).unwrap();
        let m = lagrange_multiplier(&pt, &p, &b).unwrap();
        assert!(m.varphi.norm_l2() <= 1e-10);
    }

    #[test]
    fn fiber_operator_is_negative_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let b = basis();
        let p = ActionParams::new(0.5).unwrap();
        let u = random_u(&b, &mut rng, 1.0);
        let op = FiberOperator::new(&u, &p, &b).unwrap();
        for _ in 0..10 {
            let mut phi = b.spinor_zeros();
            for (s, lam) in b.slot_lambda().iter().enumerate() {
                if *lam < 0.0 {
                    phi.coeffs[s] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            assert!(op.rayleigh_quotient(&phi) <= -0.5f64.min(1.0) + 1e-12);
        }
    }
}
