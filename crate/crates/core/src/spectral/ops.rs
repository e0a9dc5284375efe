use num_complex::Complex64;

use super::basis::{SpectralBasis, Subspace};
use super::field::{ScalarField, SpinorField};
use crate::error::{Result, SolverError};

type Mat2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Clifford generators `γ₁ = iσ₁`, `γ₂ = iσ₂` acting on ℂ²; `γ_iγ_j + γ_jγ_i = −2δ_ij`.
pub fn clifford_generators() -> [Mat2; 2] {
    let one = Complex64::new(1.0, 0.0);
    [[[ZERO, I], [I, ZERO]], [[ZERO, one], [-one, ZERO]]]
}

/// Symbol of `D = γ₁∂₁ + γ₂∂₂` on `e^{iξ·x}`: `i(ξ₁γ₁ + ξ₂γ₂)`, Hermitian with eigenvalues `±|ξ|`.
pub fn clifford_symbol(xi: [f64; 2]) -> Mat2 {
    let g = clifford_generators();
    let mut s = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            s[r][c] = I * (g[0][r][c] * xi[0] + g[1][r][c] * xi[1]);
        }
    }
    s
}

/// Dirac operator applied through the component-space Clifford symbol at every mode.
pub fn dirac_apply(psi: &SpinorField, basis: &SpectralBasis) -> Result<SpinorField> {
    basis.check_spinor(psi)?;
    let comps = basis.spinor_components(psi);
    let out: Vec<[Complex64; 2]> = basis
        .modes()
        .iter()
        .zip(&comps)
        .map(|(mode, c)| {
            let s = clifford_symbol(mode.xi);
            [s[0][0] * c[0] + s[0][1] * c[1], s[1][0] * c[0] + s[1][1] * c[1]]
        })
        .collect();
    Ok(basis.spinor_from_components(&out))
}

/// `Dψ` as a diagonal multiplier in the eigen-slot coordinates.
pub(crate) fn dirac_diag(psi: &SpinorField, basis: &SpectralBasis) -> SpinorField {
    spinor_multiplier(psi, basis, |lam, _| lam)
}

/// Apply `f(λ, harmonic)` slot-wise.
pub(crate) fn spinor_multiplier(
    psi: &SpinorField,
    basis: &SpectralBasis,
    f: impl Fn(f64, bool) -> f64,
) -> SpinorField {
    let lam = basis.slot_lambda();
    SpinorField {
        coeffs: psi
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c * f(lam[s], basis.slot_is_harmonic(s)))
            .collect(),
    }
}

/// Apply a real Fourier multiplier `f(|ξ|²)` to a scalar field.
pub(crate) fn scalar_multiplier(u: &ScalarField, basis: &SpectralBasis, f: impl Fn(f64) -> f64) -> ScalarField {
    let mut spec = basis.scalar_spectrum(u);
    for (c, xi2) in spec.iter_mut().zip(basis.scalar_xi2()) {
        if let Some(x) = xi2 {
            *c *= f(*x);
        }
    }
    basis.scalar_from_spectrum(&spec)
}

/// `Δu` with symbol `−|ξ|²`.
pub fn laplace_apply(u: &ScalarField, basis: &SpectralBasis) -> Result<ScalarField> {
    basis.check_scalar(u)?;
    Ok(scalar_multiplier(u, basis, |x| -x))
}

/// `|D|^s ψ`; the harmonic block is annihilated for `s > 0` and kept at `s = 0`.
pub fn fractional_apply(psi: &SpinorField, s: f64, basis: &SpectralBasis) -> Result<SpinorField> {
    basis.check_spinor(psi)?;
    if s < 0.0 {
        let harmonic_part = psi
            .coeffs
            .iter()
            .enumerate()
            .filter(|(slot, _)| basis.slot_is_harmonic(*slot))
            .fold(0.0_f64, |m, (_, c)| m.max(c.norm()));
        if harmonic_part > 0.0 {
            return Err(SolverError::IllPosed(format!(
                "|D|^{s} undefined on a field with harmonic component of size {harmonic_part:e}"
            )));
        }
    }
    Ok(spinor_multiplier(psi, basis, |lam, harmonic| {
        if harmonic {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            lam.abs().powf(s)
        }
    }))
}

/// Sobolev spaces with diagonal multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SobolevSpace {
    /// Multiplier `1 + |ξ|²`.
    H1Scalar,
    /// Multiplier `(1 + |ξ|²)⁻¹`.
    HMinus1Scalar,
    /// Multiplier `1 + |λ|`.
    HHalfSpinor,
    /// Multiplier `(1 + |λ|)⁻¹`.
    HMinusHalfSpinor,
}

#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Spinor(&'a SpinorField),
}

pub fn sobolev_inner(a: FieldRef<'_>, b: FieldRef<'_>, space: SobolevSpace, basis: &SpectralBasis) -> Result<f64> {
    use SobolevSpace::*;
    match (a, b, space) {
        (FieldRef::Scalar(u), FieldRef::Scalar(v), H1Scalar) => {
            basis.check_scalar(u)?;
            basis.check_scalar(v)?;
            Ok(scalar_weighted_inner(u, v, basis, |x| 1.0 + x))
        }
        (FieldRef::Scalar(u), FieldRef::Scalar(v), HMinus1Scalar) => {
            basis.check_scalar(u)?;
            basis.check_scalar(v)?;
            Ok(scalar_weighted_inner(u, v, basis, |x| 1.0 / (1.0 + x)))
        }
        (FieldRef::Spinor(p), FieldRef::Spinor(q), HHalfSpinor) => {
            basis.check_spinor(p)?;
            basis.check_spinor(q)?;
            Ok(hhalf_inner(p, q, basis))
        }
        (FieldRef::Spinor(p), FieldRef::Spinor(q), HMinusHalfSpinor) => {
            basis.check_spinor(p)?;
            basis.check_spinor(q)?;
            Ok(hmhalf_inner(p, q, basis))
        }
        _ => Err(SolverError::Shape(format!(
            "field kinds do not match the space {space:?}"
        ))),
    }
}

pub(crate) fn scalar_weighted_inner(
    u: &ScalarField,
    v: &ScalarField,
    basis: &SpectralBasis,
    w: impl Fn(f64) -> f64,
) -> f64 {
    let su = basis.scalar_spectrum(u);
    let sv = basis.scalar_spectrum(v);
    let mut acc = 0.0;
    for ((a, b), xi2) in su.iter().zip(&sv).zip(basis.scalar_xi2()) {
        if let Some(x) = xi2 {
            acc += w(*x) * (a.conj() * b).re;
        }
    }
    acc * basis.geometry().volume()
}

/// `∫ u v dv` (exact grid quadrature for band-limited fields).
pub fn l2_scalar(u: &ScalarField, v: &ScalarField, basis: &SpectralBasis) -> f64 {
    let s: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    s * basis.geometry().cell_weight()
}

pub fn h1_inner(u: &ScalarField, v: &ScalarField, basis: &SpectralBasis) -> f64 {
    scalar_weighted_inner(u, v, basis, |x| 1.0 + x)
}

pub fn hm1_inner(u: &ScalarField, v: &ScalarField, basis: &SpectralBasis) -> f64 {
    scalar_weighted_inner(u, v, basis, |x| 1.0 / (1.0 + x))
}

pub fn hhalf_inner(p: &SpinorField, q: &SpinorField, basis: &SpectralBasis) -> f64 {
    weighted_slot_inner(p, q, basis, |lam| 1.0 + lam.abs())
}

pub fn hmhalf_inner(p: &SpinorField, q: &SpinorField, basis: &SpectralBasis) -> f64 {
    weighted_slot_inner(p, q, basis, |lam| 1.0 / (1.0 + lam.abs()))
}

fn weighted_slot_inner(p: &SpinorField, q: &SpinorField, basis: &SpectralBasis, w: impl Fn(f64) -> f64) -> f64 {
    p.coeffs
        .iter()
        .zip(&q.coeffs)
        .zip(basis.slot_lambda())
        .map(|((a, b), lam)| w(*lam) * (a.re * b.re + a.im * b.im))
        .sum()
}

/// `(1 − Δ)^{-1} u`, the Riesz map `H⁻¹ → H¹` for data given as an L² density.
pub fn riesz_h1(g: &ScalarField, basis: &SpectralBasis) -> ScalarField {
    scalar_multiplier(g, basis, |x| 1.0 / (1.0 + x))
}

/// `(1 − Δ) u`.
pub fn h1_operator(u: &ScalarField, basis: &SpectralBasis) -> ScalarField {
    scalar_multiplier(u, basis, |x| 1.0 + x)
}

/// `(1 + |D|)^{-1} ψ`, the Riesz map `H^{-1/2} → H^{1/2}`.
pub fn riesz_hhalf(g: &SpinorField, basis: &SpectralBasis) -> SpinorField {
    spinor_multiplier(g, basis, |lam, _| 1.0 / (1.0 + lam.abs()))
}

/// `(1 + |D|) ψ`.
pub fn hhalf_operator(psi: &SpinorField, basis: &SpectralBasis) -> SpinorField {
    spinor_multiplier(psi, basis, |lam, _| 1.0 + lam.abs())
}

/// Spectral projection onto one of the `H^{1/2}` subspaces. `rho` is only consulted for
/// `PlusA`/`PlusB`.
pub fn project(psi: &SpinorField, subspace: Subspace, basis: &SpectralBasis, rho: f64) -> Result<SpinorField> {
    basis.check_spinor(psi)?;
    if matches!(subspace, Subspace::PlusA | Subspace::PlusB) {
        basis.check_rho(rho)?;
    }
    let keep = |lam: f64, harmonic: bool| -> bool {
        match subspace {
            Subspace::Zero => harmonic,
            Subspace::Plus => !harmonic && lam > 0.0,
            Subspace::Minus => !harmonic && lam < 0.0,
            Subspace::PlusA => !harmonic && lam > rho,
            Subspace::PlusB => !harmonic && lam > 0.0 && lam < rho,
        }
    };
    Ok(spinor_multiplier(psi, basis, |lam, h| if keep(lam, h) { 1.0 } else { 0.0 }))
}

/// Same as [`project`] for the `ρ`-free subspaces, without the gap check.
pub(crate) fn project_unchecked(psi: &SpinorField, subspace: Subspace, basis: &SpectralBasis, rho: f64) -> SpinorField {
    spinor_multiplier(psi, basis, |lam, harmonic| {
        let keep = match subspace {
            Subspace::Zero => harmonic,
            Subspace::Plus => !harmonic && lam > 0.0,
            Subspace::Minus => !harmonic && lam < 0.0,
            Subspace::PlusA => !harmonic && lam > rho,
            Subspace::PlusB => !harmonic && lam > 0.0 && lam < rho,
        };
        if keep {
            1.0
        } else {
            0.0
        }
    })
}

/// Volume element `ω = γ₁γ₂`: `(ψ₁, ψ₂) ↦ (−iψ₁, iψ₂)`.
pub fn omega_mult(psi: &SpinorField, basis: &SpectralBasis) -> SpinorField {
    let comps: Vec<[Complex64; 2]> = basis
        .spinor_components(psi)
        .into_iter()
        .map(|c| [-I * c[0], I * c[1]])
        .collect();
    basis.spinor_from_components(&comps)
}

/// Quaternionic structure `j(ψ) = σ₂ ψ̄`: `(ψ₁, ψ₂) ↦ (−i ψ̄₂, i ψ̄₁)`.
pub fn quaternion_j(psi: &SpinorField, basis: &SpectralBasis) -> SpinorField {
    let comps = basis.spinor_components(psi);
    let mut out = vec![[ZERO; 2]; comps.len()];
    for (m, c) in comps.iter().enumerate() {
        let p = basis.conj_partner(m);
        out[p] = [-I * c[1].conj(), I * c[0].conj()];
    }
    basis.spinor_from_components(&out)
}

/// Right multiplication by the unit quaternions `1, i, j, k = i·j` (all commute with `D`).
pub fn quaternion_frame(psi: &SpinorField, basis: &SpectralBasis) -> [SpinorField; 4] {
    let ipsi = SpinorField {
        coeffs: psi.coeffs.iter().map(|c| c * I).collect(),
    };
    let jpsi = quaternion_j(psi, basis);
    let kpsi = SpinorField {
        coeffs: jpsi.coeffs.iter().map(|c| c * I).collect(),
    };
    [psi.clone(), ipsi, jpsi, kpsi]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGeometry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn basis(delta: [f64; 2], n: usize) -> SpectralBasis {
        SpectralBasis::build_full(TorusGeometry::standard(n, delta).unwrap()).unwrap()
    }

    fn random_spinor(b: &SpectralBasis, rng: &mut ChaCha8Rng) -> SpinorField {
        SpinorField {
            coeffs: (0..b.n_slots())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        }
    }

    fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
        let mut out = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }

    #[test]
    fn clifford_relation_holds_exactly() {
        let g = clifford_generators();
        for i in 0..2 {
            for j in 0..2 {
                let a = mat_mul(&g[i], &g[j]);
                let b = mat_mul(&g[j], &g[i]);
                for r in 0..2 {
                    for c in 0..2 {
                        let expect = if i == j && r == c { -2.0 } else { 0.0 };
                        assert_eq!(a[r][c] + b[r][c], Complex64::new(expect, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn eigenspinors_are_eigenvectors_of_the_symbol_route() {
        let b = basis([0.5, 0.5], 16);
        for j in (1..=b.positive_eigen().len() as i64).step_by(7) {
            for sign in [1, -1] {
                let psi = b.eigenspinor(sign * j).unwrap();
                let lam = b.eigenvalue(sign * j).unwrap();
                let d = dirac_apply(&psi, &b).unwrap();
                assert!(d.sub(&psi.scaled(lam)).norm_l2() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_spinors_are_killed() {
        let b = basis([0.0, 0.0], 16);
        assert_eq!(b.harmonic_dim(), 4);
        for l in 1..=4 {
            let psi = b.harmonic_spinor(l).unwrap();
            assert!(dirac_apply(&psi, &b).unwrap().norm_l2() < 1e-12);
        }
    }

    #[test]
    fn dirac_is_self_adjoint_by_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = basis([0.5, 0.0], 16);
        for _ in 0..10 {
            let p = random_spinor(&b, &mut rng);
            let q = random_spinor(&b, &mut rng);
            let dp = dirac_apply(&p, &b).unwrap();
            let dq = dirac_apply(&q, &b).unwrap();
            let lhs = b.integrate(&b.spinor_pairing(&dp, &q));
            let rhs = b.integrate(&b.spinor_pairing(&p, &dq));
            assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn diagonal_and_symbol_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = basis([0.0, 0.5], 16);
        let p = random_spinor(&b, &mut rng);
        let a = dirac_apply(&p, &b).unwrap();
        let d = dirac_diag(&p, &b);
        assert!(a.sub(&d).norm_l2() < 1e-11 * a.norm_l2());
    }

    #[test]
    fn laplacian_on_cosine() {
        let b = basis([0.0, 0.0], 16);
        let u = b.scalar_from_fn(|x| x[0].cos());
        let lu = laplace_apply(&u, &b).unwrap();
        for (a, c) in lu.values.iter().zip(&u.values) {
            assert!((a + c).abs() < 1e-12);
        }
        let c = b.scalar_constant(2.5);
        assert!(laplace_apply(&c, &b).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn fractional_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = basis([0.0, 0.0], 16);
        let p = random_spinor(&b, &mut rng);
        let half = fractional_apply(&fractional_apply(&p, 0.5, &b).unwrap(), 0.5, &b).unwrap();
        let one = fractional_apply(&p, 1.0, &b).unwrap();
        assert!(half.sub(&one).norm_l2() < 1e-12 * one.norm_l2());
        assert!(matches!(fractional_apply(&p, -0.5, &b), Err(SolverError::IllPosed(_))));
        let free = project(&p, Subspace::Plus, &b, 1.0).unwrap();
        assert!(fractional_apply(&free, -0.5, &b).is_ok());
        assert_eq!(fractional_apply(&p, 0.0, &b).unwrap(), p);
    }

    #[test]
    fn hhalf_norm_of_eigenspinors() {
        let b = basis([0.0, 0.0], 16);
        for j in [1_i64, 5, -3] {
            let psi = b.eigenspinor(j).unwrap();
            let n2 = sobolev_inner(FieldRef::Spinor(&psi), FieldRef::Spinor(&psi), SobolevSpace::HHalfSpinor, &b)
                .unwrap();
            assert!((n2 - (1.0 + b.eigenvalue(j).unwrap().abs())).abs() < 1e-12);
        }
        let h = b.harmonic_spinor(2).unwrap();
        assert!((hhalf_inner(&h, &h, &b) - 1.0).abs() < 1e-14);
        let u = b.scalar_zeros();
        assert!(sobolev_inner(FieldRef::Scalar(&u), FieldRef::Spinor(&h), SobolevSpace::H1Scalar, &b).is_err());
    }

    #[test]
    fn projections_resolve_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = basis([0.0, 0.0], 16);
        let p = random_spinor(&b, &mut rng);
        let rho = 1.3;
        let parts: Vec<SpinorField> = [Subspace::PlusA, Subspace::PlusB, Subspace::Zero, Subspace::Minus]
            .iter()
            .map(|s| project(&p, *s, &b, rho).unwrap())
            .collect();
        let mut sum = b.spinor_zeros();
        for q in &parts {
            sum.axpy(1.0, q);
        }
        assert!(sum.sub(&p).norm_l2() < 1e-12);
        let plus = project(&p, Subspace::Plus, &b, rho).unwrap();
        assert!(plus.sub(&parts[0].add(&parts[1])).norm_l2() < 1e-12);
        let again = project(&parts[0], Subspace::PlusA, &b, rho).unwrap();
        assert_eq!(again, parts[0]);
        assert!(matches!(
            project(&p, Subspace::PlusA, &b, 1.0),
            Err(SolverError::SpectralGap { .. })
        ));
    }

    #[test]
    fn omega_anticommutes_and_j_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for delta in TorusGeometry::all_spin_structures() {
            let b = basis(delta, 16);
            let p = random_spinor(&b, &mut rng);
            let q = random_spinor(&b, &mut rng);
            let dp = dirac_apply(&p, &b).unwrap();
            let lhs = dirac_apply(&omega_mult(&p, &b), &b).unwrap();
            assert!(lhs.add(&omega_mult(&dp, &b)).norm_l2() < 1e-11 * dp.norm_l2());
            let lhs = dirac_apply(&quaternion_j(&p, &b), &b).unwrap();
            assert!(lhs.sub(&quaternion_j(&dp, &b)).norm_l2() < 1e-11 * dp.norm_l2());
            let jj = quaternion_j(&quaternion_j(&p, &b), &b);
            assert!(jj.add(&p).norm_l2() < 1e-12 * p.norm_l2());
            let wp = omega_mult(&p, &b);
            let wq = omega_mult(&q, &b);
            assert!((wp.dot_l2(&wq) - p.dot_l2(&q)).abs() < 1e-11);
            // pointwise isometries
            let d0 = b.spinor_density(&p);
            for f in [omega_mult(&p, &b), quaternion_j(&p, &b)] {
                for (a, c) in b.spinor_density(&f).iter().zip(&d0) {
                    assert!((a - c).abs() < 1e-11 * c.max(1.0));
                }
            }
        }
    }

    #[test]
    fn omega_maps_positive_to_negative_eigenspinors() {
        let b = basis([0.5, 0.5], 16);
        let psi = b.eigenspinor(1).unwrap();
        let w = omega_mult(&psi, &b);
        let lam = b.eigenvalue(1).unwrap();
        let dw = dirac_apply(&w, &b).unwrap();
        assert!(dw.add(&w.scaled(lam)).norm_l2() < 1e-12);
        assert!(w.sub(&b.eigenspinor(-1).unwrap()).norm_l2() < 1e-12);
    }
}
