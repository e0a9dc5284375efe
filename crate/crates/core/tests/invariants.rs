//! Property tests of structural invariants on random inputs.

use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use sshg_core::action::{evaluate_j, ActionParams};
use sshg_core::minmax::classify;
use sshg_core::nehari::{fiber_solve, CERT_TOL};
use sshg_core::spectral::{hhalf_inner, project, quaternion_j, ScalarField, SpectralBasis, SpinorField, Subspace, TorusGeometry};
use sshg_core::sweepout::{build_sweepout_chi, smooth_step, SweepoutChi};

fn basis() -> &'static SpectralBasis {
    static B: OnceLock<SpectralBasis> = OnceLock::new();
    B.get_or_init(|| SpectralBasis::build_full(TorusGeometry::standard(16, [0.5, 0.5]).unwrap()).unwrap())
}

fn chi() -> &'static (SweepoutChi, TorusGeometry) {
    static C: OnceLock<(SweepoutChi, TorusGeometry)> = OnceLock::new();
    C.get_or_init(|| {
        let g = TorusGeometry::standard(64, [0.5, 0.5]).unwrap();
        (build_sweepout_chi(&g, 0.2 * g.volume()).unwrap(), g)
    })
}

fn smooth_u(a: &[f64]) -> ScalarField {
    basis().scalar_from_fn(|x| a[0] + a[1] * x[0].cos() + a[2] * (x[0] + x[1]).sin() + a[3] * (2.0 * x[1]).cos())
}

/// Spinor supported on eigenvalues of modulus below 3, with coefficients from `c`.
fn low_spinor(c: &[(f64, f64)], free_only: bool) -> SpinorField {
    let b = basis();
    let mut psi = b.spinor_zeros();
    let mut it = c.iter().cycle();
    for (slot, lam) in b.slot_lambda().iter().enumerate() {
        if lam.abs() < 3.0 && (!free_only || *lam >= 0.0) {
            let (re, im) = it.next().unwrap();
            psi.coeffs[slot] = Complex64::new(*re, *im);
        }
    }
    psi
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 8..24)
}

fn amplitudes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.6f64..0.6, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_projections_split_every_spinor(c in coeffs(), rho in 0.2f64..2.0) {
        let b = basis();
        prop_assume!(b.check_rho(rho).is_ok());
        let psi = low_spinor(&c, false);
        let parts: Vec<SpinorField> = [Subspace::PlusA, Subspace::PlusB, Subspace::Zero, Subspace::Minus]
            .iter()
            .map(|&s| project(&psi, s, b, rho).unwrap())
            .collect();
        let mut sum = b.spinor_zeros();
        for p in &parts {
            sum.axpy(1.0, p);
        }
        prop_assert!(sum.sub(&psi).max_abs_coeff() <= 1e-15);
        for (i, p) in parts.iter().enumerate() {
            prop_assert_eq!(&project(p, [Subspace::PlusA, Subspace::PlusB, Subspace::Zero, Subspace::Minus][i], b, rho).unwrap(), p);
            for q in &parts[i + 1..] {
                prop_assert!(hhalf_inner(p, q, b).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn action_is_invariant_under_the_symmetry_group(a in amplitudes(), c in coeffs(), rho in 0.2f64..1.5) {
        let b = basis();
        let params = ActionParams::new(rho).unwrap();
        let (u, psi) = (smooth_u(&a), low_spinor(&c, false));
        let j = evaluate_j(&u, &psi, &params, b).unwrap();
        let tol = 1e-12 * j.abs().max(1.0);
        prop_assert!((evaluate_j(&u.neg(), &psi, &params, b).unwrap() - j).abs() <= tol);
        prop_assert!((evaluate_j(&u, &quaternion_j(&psi, b), &params, b).unwrap() - j).abs() <= tol);
        prop_assert!((evaluate_j(&u, &psi.scaled(-1.0), &params, b).unwrap() - j).abs() <= tol);
    }

    #[test]
    fn fiber_is_certified_even_and_linear(a in amplitudes(), c1 in coeffs(), c2 in coeffs(), t in -2.0f64..2.0) {
        let b = basis();
        let params = ActionParams::new(0.5).unwrap();
        let u = smooth_u(&a);
        let (f1, f2) = (low_spinor(&c1, true), low_spinor(&c2, true));
        let p1 = fiber_solve(&u, &f1, &params, b).unwrap();
        let p2 = fiber_solve(&u, &f2, &params, b).unwrap();
        let scale = hhalf_inner(&f1, &f1, b).sqrt().max(1.0);
        prop_assert!(p1.constraint_norm <= CERT_TOL * scale);
        prop_assert_eq!(&fiber_solve(&u.neg(), &f1, &params, b).unwrap().psi, &p1.psi);
        let mut comb = f1.clone();
        comb.axpy(t, &f2);
        let pc = fiber_solve(&u, &comb, &params, b).unwrap();
        let mut lin = p1.split.minus.clone();
        lin.axpy(t, &p2.split.minus);
        prop_assert!(pc.split.minus.sub(&lin).norm_l2() <= 1e-10 * (1.0 + t.abs()));
    }

    #[test]
    fn classification_ignores_the_sign_of_u(a in amplitudes(), c in coeffs()) {
        let b = basis();
        let (u, psi) = (smooth_u(&a), low_spinor(&c, false));
        prop_assert_eq!(classify(&u, &psi, b), classify(&u.neg(), &psi, b));
    }

    #[test]
    fn sweepout_is_antiperiodic_and_bounded(theta in 0.0f64..(4.0 * std::f64::consts::PI), x1 in 0.0f64..6.3, x2 in 0.0f64..6.3) {
        let (chi, _) = chi();
        let v = chi.eval(theta, [x1, x2]);
        prop_assert!(v.abs() <= 1.0);
        prop_assert!((chi.eval(theta + std::f64::consts::PI, [x1, x2]) + v).abs() <= 1e-12);
        prop_assert_eq!(chi.eval(0.0, [x1, x2]), 1.0);
        let h = chi.height(x2);
        prop_assert!(h >= chi.width_delta - 1e-15 && h <= std::f64::consts::PI - chi.width_delta + 1e-15);
    }

    #[test]
    fn smooth_step_is_monotone_and_odd_about_one_half(z in -1.5f64..1.5, dz in 0.0f64..0.5) {
        let (s, t) = (smooth_step(z), smooth_step(z + dz));
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!(t >= s);
        prop_assert!((s + smooth_step(-z) - 1.0).abs() <= 1e-15);
    }
}

#[test]
fn interface_band_stays_within_budget_on_a_fine_grid() {
    let (chi, g) = chi();
    for k in 0..64 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
        assert!(chi.interface_volume(theta, g) < chi.epsilon);
    }
}
