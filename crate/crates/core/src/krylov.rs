//! Preconditioned conjugate gradients and MINRES over an abstract inner-product space.

use crate::error::{Result, SolverError};
use crate::spectral::{ScalarField, SpinorField};

/// Minimal vector-space interface needed by the Krylov solvers.
pub trait KrylovVector: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
    fn scale(&mut self, a: f64);
    fn zeros_like(&self) -> Self;
}

impl KrylovVector for SpinorField {
    fn axpy(&mut self, a: f64, x: &Self) {
        SpinorField::axpy(self, a, x);
    }
    fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }
    fn zeros_like(&self) -> Self {
        SpinorField::zeros(self.len())
    }
}

impl KrylovVector for ScalarField {
    fn axpy(&mut self, a: f64, x: &Self) {
        ScalarField::axpy(self, a, x);
    }
    fn scale(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }
    fn zeros_like(&self) -> Self {
        ScalarField::zeros(self.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-15,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrylovOutcome<V> {
    pub x: V,
    pub iterations: usize,
    /// Final residual in the preconditioner norm `sqrt(⟨r, M r⟩)`.
    pub residual: f64,
    /// Right-hand side in the same norm.
    pub rhs_norm: f64,
    pub converged: bool,
}

/// Preconditioned CG for `A x = b` with `A` symmetric positive definite and `M ≈ A⁻¹` SPD,
/// both with respect to `dot`. Residuals are measured as `sqrt(⟨r, M r⟩)`.
pub fn pcg<V: KrylovVector>(
    apply: impl Fn(&V) -> V,
    precond: impl Fn(&V) -> V,
    dot: impl Fn(&V, &V) -> f64,
    b: &V,
    x0: Option<V>,
    opts: &KrylovOptions,
) -> KrylovOutcome<V> {
    let zb = precond(b);
    let rhs_norm = dot(b, &zb).max(0.0).sqrt();
    let mut x = x0.unwrap_or_else(|| b.zeros_like());
    let mut r = b.clone();
    r.axpy(-1.0, &apply(&x));
    let mut z = precond(&r);
    let mut rz = dot(&r, &z);
    let target = (opts.rel_tol * rhs_norm).max(opts.abs_tol);
    let mut res = rz.max(0.0).sqrt();
    if res <= target {
        return KrylovOutcome {
            x,
            iterations: 0,
            residual: res,
            rhs_norm,
            converged: true,
        };
    }
    let mut p = z.clone();
    for it in 1..=opts.max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return KrylovOutcome {
                x,
                iterations: it,
                residual: res,
                rhs_norm,
                converged: false,
            };
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        z = precond(&r);
        let rz_new = dot(&r, &z);
        res = rz_new.max(0.0).sqrt();
        if res <= target {
            return KrylovOutcome {
                x,
                iterations: it,
                residual: res,
                rhs_norm,
                converged: true,
            };
        }
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.axpy(1.0, &z);
    }
    KrylovOutcome {
        x,
        iterations: opts.max_iter,
        residual: res,
        rhs_norm,
        converged: false,
    }
}

/// Preconditioned MINRES for symmetric (possibly indefinite) `A` with SPD preconditioner `M`.
/// The reported residual is the estimate `‖b − A x‖_M`.
pub fn minres<V: KrylovVector>(
    apply: impl Fn(&V) -> V,
    precond: impl Fn(&V) -> V,
    dot: impl Fn(&V, &V) -> f64,
    b: &V,
    opts: &KrylovOptions,
) -> Result<KrylovOutcome<V>> {
    let mut x = b.zeros_like();
    let mut r1 = b.clone();
    let mut y = precond(&r1);
    let beta1 = dot(&r1, &y);
    if beta1 < 0.0 {
        return Err(SolverError::Internal("MINRES preconditioner is not positive definite".into()));
    }
    let beta1 = beta1.sqrt();
    if beta1 == 0.0 {
        return Ok(KrylovOutcome {
            x,
            iterations: 0,
            residual: 0.0,
            rhs_norm: 0.0,
            converged: true,
        });
    }
    let target = (opts.rel_tol * beta1).max(opts.abs_tol);
    let mut r2 = r1.clone();
    let mut w = b.zeros_like();
    let mut w2 = b.zeros_like();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln) = (0.0_f64, 0.0_f64);
    let mut phibar = beta1;
    let (mut cs, mut sn) = (-1.0_f64, 0.0_f64);
    for it in 1..=opts.max_iter {
        let mut v = y.clone();
        v.scale(1.0 / beta);
        y = apply(&v);
        if it >= 2 {
            y.axpy(-beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        y.axpy(-alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        y = precond(&r2);
        oldb = beta;
        let bb = dot(&r2, &y);
        if bb < 0.0 {
            return Err(SolverError::Internal("MINRES preconditioner is not positive definite".into()));
        }
        beta = bb.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let w1 = std::mem::replace(&mut w2, w);
        w = v;
        w.axpy(-oldeps, &w1);
        w.axpy(-delta, &w2);
        w.scale(1.0 / gamma);
        x.axpy(phi, &w);
        if phibar <= target || beta == 0.0 {
            return Ok(KrylovOutcome {
                x,
                iterations: it,
                residual: phibar,
                rhs_norm: beta1,
                converged: true,
            });
        }
    }
    Ok(KrylovOutcome {
        x,
        iterations: opts.max_iter,
        residual: phibar,
        rhs_norm: beta1,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct V(Vec<f64>);

    impl KrylovVector for V {
        fn axpy(&mut self, a: f64, x: &Self) {
            for (y, x) in self.0.iter_mut().zip(&x.0) {
                *y += a * x;
            }
        }
        fn scale(&mut self, a: f64) {
            self.0.iter_mut().for_each(|y| *y *= a);
        }
        fn zeros_like(&self) -> Self {
            V(vec![0.0; self.0.len()])
        }
    }

    fn dot(a: &V, b: &V) -> f64 {
        a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum()
    }

    fn matvec(m: &[Vec<f64>], x: &V) -> V {
        V(m.iter().map(|row| row.iter().zip(&x.0).map(|(a, b)| a * b).sum()).collect())
    }

    fn tridiag(n: usize, diag: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            m[i][i] = diag(i);
            if i + 1 < n {
                m[i][i + 1] = 0.3;
                m[i + 1][i] = 0.3;
            }
        }
        m
    }

    #[test]
    fn pcg_solves_spd_system() {
        let n = 40;
        let m = tridiag(n, |i| 1.0 + i as f64);
        let b = V((0..n).map(|i| (i as f64).sin()).collect());
        let d: Vec<f64> = (0..n).map(|i| 1.0 / m[i][i]).collect();
        let out = pcg(
            |x| matvec(&m, x),
            |r| V(r.0.iter().zip(&d).map(|(a, b)| a * b).collect()),
            dot,
            &b,
            None,
            &KrylovOptions::default(),
        );
        assert!(out.converged);
        let mut r = b.clone();
        r.axpy(-1.0, &matvec(&m, &out.x));
        assert!(dot(&r, &r).sqrt() < 1e-10);
    }

    #[test]
    fn minres_solves_indefinite_system() {
        let n = 40;
        let m = tridiag(n, |i| i as f64 - 19.5);
        let b = V((0..n).map(|i| (i as f64 * 0.7).cos()).collect());
        let d: Vec<f64> = (0..n).map(|i| 1.0 / m[i][i].abs()).collect();
        let out = minres(
            |x| matvec(&m, x),
            |r| V(r.0.iter().zip(&d).map(|(a, b)| a * b).collect()),
            dot,
            &b,
            &KrylovOptions::default(),
        )
        .unwrap();
        assert!(out.converged);
        let mut r = b.clone();
        r.axpy(-1.0, &matvec(&m, &out.x));
        assert!(dot(&r, &r).sqrt() < 1e-9);
    }
}
