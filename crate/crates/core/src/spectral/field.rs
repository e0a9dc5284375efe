use num_complex::Complex64;

/// Real scalar field stored as grid samples on the collocation grid.
///
/// Values are kept band-limited: constructors in [`SpectralBasis`](super::SpectralBasis)
/// strip the Nyquist lines so the field is an exact trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

/// Spinor field stored in Dirac eigen-coordinates.
///
/// Slot `2m` holds the coefficient of the positive-eigenvalue plane wave at spinor mode `m`,
/// slot `2m + 1` the negative one. For the zero mode (harmonic spinors) the two slots are the
/// two constant spinor components. The physical field is
/// `ψ(x) = Σ_m (c_{2m} v⁺_m + c_{2m+1} v⁻_m) e^{i ξ_m · x} / √Vol`, so the coefficient vector is
/// L²-isometric.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &ScalarField) {
        for (y, x) in self.values.iter_mut().zip(&x.values) {
            *y += a * x;
        }
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Grid variance `mean((u − mean u)²)`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.values.len() as f64
    }
}

impl SpinorField {
    pub fn zeros(slots: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); slots],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &SpinorField) {
        for (y, x) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += x * a;
        }
    }

    pub fn add(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpinorField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Real L² pairing `Re ∫⟨ψ, φ⟩` (the slot basis is orthonormal).
    pub fn dot_l2(&self, other: &SpinorField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot_l2(self).sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }
}
