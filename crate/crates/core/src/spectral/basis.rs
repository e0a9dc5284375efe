use num_complex::Complex64;
use std::f64::consts::PI;

use super::fft::{bin, wavenumber, Fft2};
use super::field::{ScalarField, SpinorField};
use super::geometry::TorusGeometry;
use super::ops::clifford_symbol;
use crate::error::{Result, SolverError};

/// Minimum admissible distance between `ρ` and any computed eigenvalue.
pub const SPECTRAL_GAP_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// One spinor Fourier mode `k + δ` together with the Dirac eigenvectors of its symbol.
#[derive(Debug, Clone)]
pub struct SpinMode {
    pub k: [i32; 2],
    /// Physical frequency `(k + δ) · 2π/L`.
    pub xi: [f64; 2],
    pub abs_xi: f64,
    /// Eigenvector of the Clifford symbol for `+|ξ|` (or `(1, 0)` for the zero mode).
    pub plus: [Complex64; 2],
    /// Eigenvector for `−|ξ|` (or `(0, 1)` for the zero mode).
    pub minus: [Complex64; 2],
    /// Numerically computed symbol eigenvalues `(λ⁺, λ⁻)`.
    pub symbol_eigs: [f64; 2],
    pub harmonic: bool,
    pub(crate) fft_bin: usize,
}

/// Spectral subspaces of `H^{1/2}` used by the projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subspace {
    Plus,
    Minus,
    Zero,
    /// Positive eigenvalues above `ρ`.
    PlusA,
    /// Positive eigenvalues below `ρ`.
    PlusB,
}

/// A real eigenspinor: `coeff · e_slot` in the slot basis.
#[derive(Debug, Clone, Copy)]
pub struct RealEigen {
    pub value: f64,
    pub slot: usize,
    pub coeff: Complex64,
}

/// Dirac eigenbasis on a flat torus, plus everything needed to move between grid values and
/// spectral coefficients.
///
/// The spinor discretization is the span of the modes with `|ξ| ≤ cutoff`; every eigenvalue
/// of the Dirac operator on that span is listed (real multiplicity, i.e. a complex mode
/// contributes two real eigenspinors `Ψ` and `iΨ`).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    geom: TorusGeometry,
    cutoff: f64,
    fft: Fft2,
    modes: Vec<SpinMode>,
    /// Signed Dirac eigenvalue attached to each slot.
    slot_lambda: Vec<f64>,
    slot_harmonic: Vec<bool>,
    /// For each mode, the mode index of `−ξ` (conjugation partner).
    conj_partner: Vec<usize>,
    /// Twist phase `e^{iδ·x·2π/L}` on the grid.
    twist: Vec<Complex64>,
    /// `|ξ|²` per scalar FFT bin; `None` marks the stripped Nyquist lines.
    scalar_xi2: Vec<Option<f64>>,
    harmonic: Vec<RealEigen>,
    positive: Vec<RealEigen>,
    negative: Vec<RealEigen>,
}

impl SpectralBasis {
    /// Build the eigenbasis of all spinor modes with `|k + δ|·2π/L ≤ cutoff`.
    pub fn build(geom: TorusGeometry, cutoff: f64) -> Result<Self> {
        geom.validate()?;
        let nyq = geom.nyquist_cutoff();
        if !(cutoff.is_finite() && cutoff >= 0.0) {
            return Err(SolverError::Config(format!("cutoff must be >= 0, got {cutoff}")));
        }
        if cutoff > nyq * (1.0 + 1e-12) {
            return Err(SolverError::Resolution(format!(
                "cutoff {cutoff} exceeds the Nyquist bound {nyq} for grid_n = {}",
                geom.grid_n
            )));
        }
        let n = geom.grid_n;
        let unit = geom.wavenumber_unit();
        let delta = geom.spin_delta;
        let kmax = n as i32 / 2;

        let mut modes = Vec::new();
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                let xi = [(k1 as f64 + delta[0]) * unit, (k2 as f64 + delta[1]) * unit];
                let abs_xi = xi[0].hypot(xi[1]);
                if abs_xi > cutoff * (1.0 + 1e-12) + 1e-14 {
                    continue;
                }
                modes.push(Self::make_mode([k1, k2], xi, abs_xi, n));
            }
        }
        // Harmonic block first, then by |k + δ|, then lexicographic on k.
        modes.sort_by(|a, b| {
            b.harmonic
                .cmp(&a.harmonic)
                .then(a.abs_xi.partial_cmp(&b.abs_xi).unwrap())
                .then(a.k.cmp(&b.k))
        });

        let twice = geom.twice_delta();
        let mut lookup = std::collections::HashMap::with_capacity(modes.len());
        for (i, m) in modes.iter().enumerate() {
            lookup.insert(m.k, i);
        }
        let conj_partner = modes
            .iter()
            .map(|m| {
                let kp = [-m.k[0] - twice[0], -m.k[1] - twice[1]];
                lookup.get(&kp).copied().ok_or_else(|| {
                    SolverError::Internal(format!("mode set not closed under conjugation at {:?}", m.k))
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let mut slot_lambda = Vec::with_capacity(2 * modes.len());
        let mut slot_harmonic = Vec::with_capacity(2 * modes.len());
        for m in &modes {
            slot_lambda.push(m.symbol_eigs[0]);
            slot_lambda.push(m.symbol_eigs[1]);
            slot_harmonic.push(m.harmonic);
            slot_harmonic.push(m.harmonic);
        }

        let mut twist = vec![ZERO; n * n];
        for i1 in 0..n {
            for i2 in 0..n {
                let phase = 2.0 * PI * (delta[0] * i1 as f64 + delta[1] * i2 as f64) / n as f64;
                twist[i1 * n + i2] = Complex64::from_polar(1.0, phase);
            }
        }

        let mut scalar_xi2 = vec![None; n * n];
        for b1 in 0..n {
            for b2 in 0..n {
                let k1 = wavenumber(b1, n);
                let k2 = wavenumber(b2, n);
                if k1 == -kmax || k2 == -kmax {
                    continue;
                }
                let x1 = k1 as f64 * unit;
                let x2 = k2 as f64 * unit;
                scalar_xi2[b1 * n + b2] = Some(x1 * x1 + x2 * x2);
            }
        }

        let mut basis = Self {
            geom,
            cutoff,
            fft: Fft2::new(n),
            modes,
            slot_lambda,
            slot_harmonic,
            conj_partner,
            twist,
            scalar_xi2,
            harmonic: Vec::new(),
            positive: Vec::new(),
            negative: Vec::new(),
        };
        basis.list_eigenspinors();
        Ok(basis)
    }

    /// Build with the largest admissible cutoff.
    pub fn build_full(geom: TorusGeometry) -> Result<Self> {
        Self::build(geom, geom.nyquist_cutoff())
    }

    fn make_mode(k: [i32; 2], xi: [f64; 2], abs_xi: f64, n: usize) -> SpinMode {
        let fft_bin = bin(k[0], n) * n + bin(k[1], n);
        if abs_xi == 0.0 {
            let one = Complex64::new(1.0, 0.0);
            return SpinMode {
                k,
                xi,
                abs_xi,
                plus: [one, ZERO],
                minus: [ZERO, one],
                symbol_eigs: [0.0, 0.0],
                harmonic: true,
                fft_bin,
            };
        }
        let (eigs, vecs) = hermitian_eigen_2x2(&clifford_symbol(xi));
        SpinMode {
            k,
            xi,
            abs_xi,
            plus: vecs[0],
            minus: vecs[1],
            symbol_eigs: eigs,
            harmonic: false,
            fft_bin,
        }
    }

    fn list_eigenspinors(&mut self) {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        for (m, mode) in self.modes.iter().enumerate() {
            if mode.harmonic {
                for slot in [2 * m, 2 * m + 1] {
                    for coeff in [one, i] {
                        self.harmonic.push(RealEigen {
                            value: 0.0,
                            slot,
                            coeff,
                        });
                    }
                }
                continue;
            }
            for coeff in [one, i] {
                self.positive.push(RealEigen {
                    value: mode.symbol_eigs[0],
                    slot: 2 * m,
                    coeff,
                });
            }
        }
        // Ψ_{−j} = ω · Ψ_j.
        let negative: Vec<RealEigen> = self
            .positive
            .iter()
            .map(|e| {
                let mut f = SpinorField::zeros(self.n_slots());
                f.coeffs[e.slot] = e.coeff;
                let w = super::ops::omega_mult(&f, self);
                let slot = e.slot + 1;
                RealEigen {
                    value: self.slot_lambda[slot],
                    slot,
                    coeff: w.coeffs[slot],
                }
            })
            .collect();
        self.negative = negative;
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geom
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn modes(&self) -> &[SpinMode] {
        &self.modes
    }

    pub fn n_slots(&self) -> usize {
        self.slot_lambda.len()
    }

    pub fn n_grid(&self) -> usize {
        self.geom.grid_n * self.geom.grid_n
    }

    pub fn slot_lambda(&self) -> &[f64] {
        &self.slot_lambda
    }

    pub fn slot_is_harmonic(&self, slot: usize) -> bool {
        self.slot_harmonic[slot]
    }

    pub(crate) fn conj_partner(&self, mode: usize) -> usize {
        self.conj_partner[mode]
    }

    /// Real dimension `h` of the kernel of the Dirac operator.
    pub fn harmonic_dim(&self) -> usize {
        self.harmonic.len()
    }

    pub fn harmonic_eigen(&self) -> &[RealEigen] {
        &self.harmonic
    }

    /// Positive eigenpairs `λ_1 ≤ λ_2 ≤ …` (real multiplicity).
    pub fn positive_eigen(&self) -> &[RealEigen] {
        &self.positive
    }

    /// Negative eigenpairs with `λ_{−j} = −λ_j`.
    pub fn negative_eigen(&self) -> &[RealEigen] {
        &self.negative
    }

    /// Eigenvalue `λ_j`, `j ∈ ℤ \ {0}`.
    pub fn eigenvalue(&self, j: i64) -> Option<f64> {
        self.eigen_entry(j).map(|e| e.value)
    }

    fn eigen_entry(&self, j: i64) -> Option<&RealEigen> {
        match j.cmp(&0) {
            std::cmp::Ordering::Greater => self.positive.get(j as usize - 1),
            std::cmp::Ordering::Less => self.negative.get((-j) as usize - 1),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// L²-normalized eigenspinor `Ψ_j`.
    pub fn eigenspinor(&self, j: i64) -> Option<SpinorField> {
        self.eigen_entry(j).map(|e| self.unit_field(e))
    }

    /// Harmonic spinor `Ψ_{0,l}`, `1 ≤ l ≤ h`.
    pub fn harmonic_spinor(&self, l: usize) -> Option<SpinorField> {
        if l == 0 {
            return None;
        }
        self.harmonic.get(l - 1).map(|e| self.unit_field(e))
    }

    pub fn unit_field(&self, e: &RealEigen) -> SpinorField {
        let mut f = SpinorField::zeros(self.n_slots());
        f.coeffs[e.slot] = e.coeff;
        f
    }

    /// Full ordered listing: harmonic block, then positive, then negative entries.
    pub fn ordered_spectrum(&self) -> Vec<f64> {
        self.harmonic
            .iter()
            .chain(&self.positive)
            .chain(&self.negative)
            .map(|e| e.value)
            .collect()
    }

    /// Distinct positive eigenvalues with their real multiplicities.
    pub fn positive_levels(&self) -> Vec<(f64, usize)> {
        let mut levels: Vec<(f64, usize)> = Vec::new();
        for e in &self.positive {
            match levels.last_mut() {
                Some((v, count)) if (e.value - *v).abs() <= 1e-12 * v.abs().max(1.0) => *count += 1,
                _ => levels.push((e.value, 1)),
            }
        }
        levels
    }

    /// Reject `ρ` sitting on (or within 1e-9 of) a computed eigenvalue.
    pub fn check_rho(&self, rho: f64) -> Result<()> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(SolverError::Config(format!("rho must be positive, got {rho}")));
        }
        for &(value, _) in &self.positive_levels() {
            let distance = (value - rho).abs();
            if distance < SPECTRAL_GAP_TOL {
                return Err(SolverError::SpectralGap {
                    rho,
                    eigenvalue: value,
                    distance,
                });
            }
        }
        Ok(())
    }

    /// `(λ_k, λ_{k+1}, k)` where `λ_k < ρ < λ_{k+1}` among positive eigenvalues
    /// (`λ_0 := 0`, `k` counts real multiplicity).
    pub fn rho_bracket(&self, rho: f64) -> Result<(f64, f64, usize)> {
        self.check_rho(rho)?;
        let below: Vec<&RealEigen> = self.positive.iter().filter(|e| e.value < rho).collect();
        let lambda_k = below.last().map(|e| e.value).unwrap_or(0.0);
        let lambda_k1 = self
            .positive
            .iter()
            .find(|e| e.value > rho)
            .map(|e| e.value)
            .ok_or_else(|| {
                SolverError::Resolution(format!(
                    "no computed eigenvalue above rho = {rho}; raise the cutoff"
                ))
            })?;
        Ok((lambda_k, lambda_k1, below.len()))
    }

    /// Slots spanning `H^{1/2,0} ⊕ H^{1/2,+}_b`, as real eigen entries.
    pub fn low_block(&self, rho: f64) -> Result<Vec<RealEigen>> {
        self.check_rho(rho)?;
        Ok(self
            .harmonic
            .iter()
            .chain(self.positive.iter().filter(|e| e.value < rho))
            .copied()
            .collect())
    }

    // ---- scalar transforms -------------------------------------------------------------

    /// Fourier coefficients `û_k` with `u(x) = Σ û_k e^{i k·x 2π/L}`, FFT bin layout.
    pub fn scalar_spectrum(&self, u: &ScalarField) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut data);
        let scale = 1.0 / self.n_grid() as f64;
        for (c, xi2) in data.iter_mut().zip(&self.scalar_xi2) {
            *c = if xi2.is_some() { *c * scale } else { ZERO };
        }
        data
    }

    pub fn scalar_from_spectrum(&self, spec: &[Complex64]) -> ScalarField {
        let mut data: Vec<Complex64> = spec
            .iter()
            .zip(&self.scalar_xi2)
            .map(|(c, xi2)| if xi2.is_some() { *c } else { ZERO })
            .collect();
        self.fft.inverse(&mut data);
        ScalarField {
            values: data.iter().map(|c| c.re).collect(),
        }
    }

    /// Band-limit raw grid samples onto the scalar discretization.
    pub fn scalar_from_grid(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.n_grid() {
            return Err(SolverError::Shape(format!(
                "scalar grid has {} samples, expected {}",
                values.len(),
                self.n_grid()
            )));
        }
        let raw = ScalarField { values };
        Ok(self.scalar_from_spectrum(&self.scalar_spectrum(&raw)))
    }

    pub fn scalar_from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        let n = self.geom.grid_n;
        let mut values = Vec::with_capacity(n * n);
        for i1 in 0..n {
            for i2 in 0..n {
                values.push(f(self.geom.point(i1, i2)));
            }
        }
        self.scalar_from_grid(values).expect("grid size matches")
    }

    pub fn scalar_constant(&self, c: f64) -> ScalarField {
        ScalarField {
            values: vec![c; self.n_grid()],
        }
    }

    pub fn scalar_zeros(&self) -> ScalarField {
        ScalarField::zeros(self.n_grid())
    }

    pub(crate) fn scalar_xi2(&self) -> &[Option<f64>] {
        &self.scalar_xi2
    }

    pub fn check_scalar(&self, u: &ScalarField) -> Result<()> {
        if u.len() != self.n_grid() {
            return Err(SolverError::Shape(format!(
                "scalar field has {} samples, basis grid has {}",
                u.len(),
                self.n_grid()
            )));
        }
        Ok(())
    }

    pub fn check_spinor(&self, psi: &SpinorField) -> Result<()> {
        if psi.len() != self.n_slots() {
            return Err(SolverError::Shape(format!(
                "spinor field has {} slots, basis has {}",
                psi.len(),
                self.n_slots()
            )));
        }
        Ok(())
    }

    // ---- spinor transforms -------------------------------------------------------------

    /// Component Fourier coefficients `(ĉ₁, ĉ₂)` per mode.
    pub fn spinor_components(&self, psi: &SpinorField) -> Vec<[Complex64; 2]> {
        self.modes
            .iter()
            .enumerate()
            .map(|(m, mode)| {
                let a = psi.coeffs[2 * m];
                let b = psi.coeffs[2 * m + 1];
                [
                    a * mode.plus[0] + b * mode.minus[0],
                    a * mode.plus[1] + b * mode.minus[1],
                ]
            })
            .collect()
    }

    /// Inverse of [`spinor_components`](Self::spinor_components).
    pub fn spinor_from_components(&self, comps: &[[Complex64; 2]]) -> SpinorField {
        let mut coeffs = Vec::with_capacity(self.n_slots());
        for (mode, c) in self.modes.iter().zip(comps) {
            coeffs.push(mode.plus[0].conj() * c[0] + mode.plus[1].conj() * c[1]);
            coeffs.push(mode.minus[0].conj() * c[0] + mode.minus[1].conj() * c[1]);
        }
        SpinorField { coeffs }
    }

    /// Grid values of both spinor components.
    pub fn spinor_to_grid(&self, psi: &SpinorField) -> [Vec<Complex64>; 2] {
        let comps = self.spinor_components(psi);
        let n2 = self.n_grid();
        let scale = 1.0 / self.geom.volume().sqrt();
        let mut out = [vec![ZERO; n2], vec![ZERO; n2]];
        for (c, grid) in out.iter_mut().enumerate() {
            for (mode, cc) in self.modes.iter().zip(&comps) {
                grid[mode.fft_bin] = cc[c];
            }
            self.fft.inverse(grid);
            for (g, t) in grid.iter_mut().zip(&self.twist) {
                *g = *g * *t * scale;
            }
        }
        out
    }

    /// Galerkin truncation of grid spinor data onto the mode set.
    pub fn spinor_from_grid(&self, grid: &[Vec<Complex64>; 2]) -> Result<SpinorField> {
        let n2 = self.n_grid();
        if grid[0].len() != n2 || grid[1].len() != n2 {
            return Err(SolverError::Shape("spinor grid arrays have wrong size".into()));
        }
        let scale = self.geom.volume().sqrt() / n2 as f64;
        let mut comps = vec![[ZERO; 2]; self.modes.len()];
        for (c, g) in grid.iter().enumerate() {
            let mut data: Vec<Complex64> = g.iter().zip(&self.twist).map(|(v, t)| v * t.conj()).collect();
            self.fft.forward(&mut data);
            for (mode, cc) in self.modes.iter().zip(comps.iter_mut()) {
                cc[c] = data[mode.fft_bin] * scale;
            }
        }
        Ok(self.spinor_from_components(&comps))
    }

    pub fn spinor_from_fn(&self, f: impl Fn([f64; 2]) -> [Complex64; 2]) -> SpinorField {
        let n = self.geom.grid_n;
        let mut grid = [vec![ZERO; n * n], vec![ZERO; n * n]];
        for i1 in 0..n {
            for i2 in 0..n {
                let v = f(self.geom.point(i1, i2));
                grid[0][i1 * n + i2] = v[0];
                grid[1][i1 * n + i2] = v[1];
            }
        }
        self.spinor_from_grid(&grid).expect("grid size matches")
    }

    pub fn spinor_zeros(&self) -> SpinorField {
        SpinorField::zeros(self.n_slots())
    }

    /// Pointwise `|ψ(x)|²` on the grid.
    pub fn spinor_density(&self, psi: &SpinorField) -> Vec<f64> {
        let [a, b] = self.spinor_to_grid(psi);
        a.iter().zip(&b).map(|(x, y)| x.norm_sqr() + y.norm_sqr()).collect()
    }

    /// Pointwise real pairing `Re⟨ψ(x), φ(x)⟩` on the grid.
    pub fn spinor_pairing(&self, psi: &SpinorField, phi: &SpinorField) -> Vec<f64> {
        let [a1, b1] = self.spinor_to_grid(psi);
        let [a2, b2] = self.spinor_to_grid(phi);
        (0..a1.len())
            .map(|i| (a1[i].conj() * a2[i] + b1[i].conj() * b2[i]).re)
            .collect()
    }

    /// Galerkin truncation of `w(x) ψ(x)` for a real grid weight `w`.
    pub fn mul_pointwise(&self, psi: &SpinorField, weight: &[f64]) -> SpinorField {
        let mut grid = self.spinor_to_grid(psi);
        for g in grid.iter_mut() {
            for (v, w) in g.iter_mut().zip(weight) {
                *v *= *w;
            }
        }
        self.spinor_from_grid(&grid).expect("grid size matches")
    }

    /// Grid quadrature `∫ f dv` of raw grid samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.geom.cell_weight()
    }
}

/// Eigen-decomposition of a 2×2 Hermitian matrix, eigenvalues in descending order.
pub(crate) fn hermitian_eigen_2x2(m: &[[Complex64; 2]; 2]) -> ([f64; 2], [[Complex64; 2]; 2]) {
    let a = m[0][0].re;
    let d = m[1][1].re;
    let c = m[1][0];
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + c.norm_sqr()).sqrt();
    let eigs = [mean + r, mean - r];
    let vecs = eigs.map(|lam| {
        // (λ − d, c) and (c̄, λ − a) are both eigenvectors; pick the better conditioned one.
        let v1 = [Complex64::new(lam - d, 0.0), c];
        let v2 = [c.conj(), Complex64::new(lam - a, 0.0)];
        let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
        let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
        let (v, nrm) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        // Fix the phase so the first nonzero component is real positive.
        let pivot = if v[0].norm() > 1e-300 { v[0] } else { v[1] };
        let phase = pivot.conj() / pivot.norm();
        [v[0] * phase / nrm, v[1] * phase / nrm]
    });
    (eigs, vecs)
}
