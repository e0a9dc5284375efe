//! Orbit distance under `ℤ₂ × S³` and the deflation penalty built on it.

use crate::action::{Representation, Variation};
use crate::pair::FieldPair;
use crate::spectral::{h1_inner, h1_operator, hhalf_inner, hhalf_operator, quaternion_frame, SpectralBasis};

/// Squared orbit distance together with the maximizing group element data.
struct OrbitFit {
    dist2: f64,
    /// `+1` if `u` is compared with `u_i`, `−1` for `−u_i`.
    sign: f64,
    /// Frame coefficients `⟨ψ, q_a ψ_i⟩` and the frame itself.
    coeffs: [f64; 4],
    frame: [crate::spectral::SpinorField; 4],
}

fn fit(a: &FieldPair, b: &FieldPair, basis: &SpectralBasis) -> OrbitFit {
    let uu = h1_inner(&a.u, &a.u, basis);
    let vv = h1_inner(&b.u, &b.u, basis);
    let uv = h1_inner(&a.u, &b.u, basis);
    let sign = if uv >= 0.0 { 1.0 } else { -1.0 };
    let du2 = (uu + vv - 2.0 * uv.abs()).max(0.0);

    // Right multiplication by unit quaternions is an isometry of H^{1/2}; the frame
    // {ψ_i, iψ_i, jψ_i, kψ_i} is orthogonal with equal norms, so the best element is the
    // normalized projection.
    let frame = quaternion_frame(&b.psi, basis);
    let coeffs = [0, 1, 2, 3].map(|k| hhalf_inner(&a.psi, &frame[k], basis));
    let cn = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let pp = hhalf_inner(&a.psi, &a.psi, basis);
    let qq = hhalf_inner(&b.psi, &b.psi, basis);
    let dpsi2 = (pp + qq - 2.0 * cn).max(0.0);
    OrbitFit {
        dist2: du2 + dpsi2,
        sign,
        coeffs,
        frame,
    }
}

/// `min_{g ∈ ℤ₂ × S³} ‖a − g·b‖_X` where `ℤ₂` flips `u` and `S³` acts on `ψ` by unit quaternions.
pub fn orbit_distance(a: &FieldPair, b: &FieldPair, basis: &SpectralBasis) -> f64 {
    fit(a, b, basis).dist2.sqrt()
}

/// Penalty `Σ w / dist²(·, orbit_i)` keeping a descent away from known solutions.
#[derive(Debug, Clone, Default)]
pub struct Deflation {
    pub solutions: Vec<FieldPair>,
    pub weight: f64,
}

impl Deflation {
    pub fn new(weight: f64) -> Self {
        Self {
            solutions: Vec::new(),
            weight,
        }
    }

    pub fn push(&mut self, p: FieldPair) {
        self.solutions.push(p);
    }

    pub fn is_active(&self) -> bool {
        self.weight > 0.0 && !self.solutions.is_empty()
    }

    pub fn value(&self, x: &FieldPair, basis: &SpectralBasis) -> f64 {
        self.solutions
            .iter()
            .map(|s| self.weight / fit(x, s, basis).dist2.max(1e-300))
            .sum()
    }

    /// Dual-form gradient of the penalty.
    pub fn gradient(&self, x: &FieldPair, basis: &SpectralBasis) -> Variation {
        let mut ru = basis.scalar_zeros();
        let mut rpsi = basis.spinor_zeros();
        for s in &self.solutions {
            let f = fit(x, s, basis);
            let d2 = f.dist2.max(1e-300);
            let c = -self.weight / (d2 * d2);
            // Riesz gradient of dist² is 2(u ∓ u_i, ψ − Σ (c_a/|c|) q_a ψ_i).
            let mut gu = x.u.clone();
            gu.axpy(-f.sign, &s.u);
            ru.axpy(2.0 * c, &gu);
            let cn = f.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut gpsi = x.psi.clone();
            if cn > 0.0 {
                for k in 0..4 {
                    gpsi.axpy(-f.coeffs[k] / cn, &f.frame[k]);
                }
            }
            rpsi.axpy(2.0 * c, &gpsi);
        }
        Variation {
            du: h1_operator(&ru, basis),
            dpsi: hhalf_operator(&rpsi, basis),
            repr: Representation::Dual,
        }
    }
}
