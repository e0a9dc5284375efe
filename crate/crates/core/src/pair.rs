//! Points and directions in the product space `H¹ × H^{1/2}`.

use crate::krylov::KrylovVector;
use crate::spectral::{h1_inner, hhalf_inner, l2_scalar, ScalarField, SpectralBasis, SpinorField};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: ScalarField,
    pub psi: SpinorField,
}

impl FieldPair {
    pub fn new(u: ScalarField, psi: SpinorField) -> Self {
        Self { u, psi }
    }

    pub fn zeros(basis: &SpectralBasis) -> Self {
        Self {
            u: basis.scalar_zeros(),
            psi: basis.spinor_zeros(),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            u: self.u.scaled(a),
            psi: self.psi.scaled(a),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// Product inner product `⟨u, v⟩_{H¹} + ⟨ψ, φ⟩_{H^{1/2}}`.
    pub fn dot_x(&self, other: &Self, basis: &SpectralBasis) -> f64 {
        h1_inner(&self.u, &other.u, basis) + hhalf_inner(&self.psi, &other.psi, basis)
    }

    pub fn norm_x(&self, basis: &SpectralBasis) -> f64 {
        self.dot_x(self, basis).max(0.0).sqrt()
    }

    /// L² pairing `∫ u v + Re⟨ψ, φ⟩` (dual against primal).
    pub fn dot_l2(&self, other: &Self, basis: &SpectralBasis) -> f64 {
        l2_scalar(&self.u, &other.u, basis) + self.psi.dot_l2(&other.psi)
    }
}

impl KrylovVector for FieldPair {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.u.axpy(a, &x.u);
        self.psi.axpy(a, &x.psi);
    }
    fn scale(&mut self, a: f64) {
        KrylovVector::scale(&mut self.u, a);
        KrylovVector::scale(&mut self.psi, a);
    }
    fn zeros_like(&self) -> Self {
        Self {
            u: self.u.zeros_like(),
            psi: self.psi.zeros_like(),
        }
    }
}
