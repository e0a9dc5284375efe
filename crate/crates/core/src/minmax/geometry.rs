//! Min-max geometry: mountain-pass endpoint, linking constants and cylinder, and the local
//! coercivity probe.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mesh::{MeshNode, MinmaxMesh};
use crate::action::{evaluate_j, ActionParams};
use crate::error::{Result, SolverError};
use crate::nehari::{fiber_solve, NehariPoint};
use crate::pair::FieldPair;
use crate::spectral::{hhalf_inner, h1_inner, ScalarField, SpectralBasis, SpinorField, Subspace};

/// Largest `dim(H⁰ ⊕ H⁺_b)` accepted by [`build_cylinder`].
pub const MAX_LINKING_DIM: usize = 12;

fn sinh2(x: f64) -> f64 {
    x.sinh().powi(2)
}

/// `(ū, s)` such that `J(ū, sΨ₁) < 0` for constant `ū` and the first positive eigenspinor.
pub fn mountain_pass_endpoint(params: &ActionParams, basis: &SpectralBasis) -> Result<(f64, f64)> {
    let rho = params.rho;
    basis.check_rho(rho)?;
    if basis.harmonic_dim() > 0 {
        return Err(SolverError::Precondition(
            "mountain pass needs a spin structure without harmonic spinors".into(),
        ));
    }
    let lambda1 = basis
        .eigenvalue(1)
        .ok_or_else(|| SolverError::Resolution("no positive eigenvalue below the cutoff".into()))?;
    if rho >= lambda1 {
        return Err(SolverError::Precondition(format!(
            "mountain pass needs rho < lambda_1 = {lambda1}, got {rho}"
        )));
    }
    let vol = basis.geometry().volume();
    let ubar = ((lambda1 + 1.0) / rho).acosh() + 0.5;
    let s = 1.5 * (4.0 * rho * rho * sinh2(ubar) * vol / (8.0 * (rho * ubar.cosh() - lambda1))).sqrt();
    Ok((ubar, s))
}

/// The certified Nehari point `(ū, sΨ₁)`; `ψ⁻ = 0` because `u` is constant.
pub fn endpoint_point(ubar: f64, s: f64, params: &ActionParams, basis: &SpectralBasis) -> Result<NehariPoint> {
    let psi1 = basis
        .eigenspinor(1)
        .ok_or_else(|| SolverError::Resolution("no positive eigenvalue below the cutoff".into()))?;
    fiber_solve(&basis.scalar_constant(ubar), &psi1.scaled(s), params, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkingConstants {
    pub t: f64,
    pub a: f64,
    pub r: f64,
    /// `k` with `λ_k < ρ < λ_{k+1}` (real multiplicity).
    pub k_index: usize,
    pub lambda_k: f64,
    pub lambda_k1: f64,
}

impl LinkingConstants {
    /// `4ρ²Vol sinh²t + 8(λ_{k+1} − ρ cosh t) A² t²`, the energy of the cylinder axis at `t`.
    pub fn axis_energy(&self, t: f64, rho: f64, vol: f64) -> f64 {
        4.0 * rho * rho * vol * sinh2(t) + 8.0 * (self.lambda_k1 - rho * t.cosh()) * self.a * self.a * t * t
    }

    /// `(ρ − λ_k)/(λ_k + 1)`.
    pub fn coercivity(&self, rho: f64) -> f64 {
        (rho - self.lambda_k) / (self.lambda_k + 1.0)
    }

    /// The three defining inequalities, each as `(lhs, rhs)` with `lhs > rhs` required.
    pub fn certificates(&self, rho: f64, vol: f64) -> [(f64, f64); 3] {
        let t = self.t;
        let first = (rho * t.cosh() - self.lambda_k1, 1.0);
        let second = (
            0.0,
            4.0 * rho * rho * vol * sinh2(t) - 8.0 * self.a * self.a * t * t * (rho * t.cosh() - self.lambda_k1),
        );
        let n = 10_001;
        let peak = (0..n)
            .map(|i| self.axis_energy(t * i as f64 / (n - 1) as f64, rho, vol))
            .fold(f64::NEG_INFINITY, f64::max);
        let third = (self.coercivity(rho) * self.r * self.r, peak);
        [first, second, third]
    }

    pub fn certified(&self, rho: f64, vol: f64) -> bool {
        self.certificates(rho, vol).iter().all(|(l, r)| l > r)
    }
}

fn linking_constants_with(params: &ActionParams, basis: &SpectralBasis, factor: f64, t_margin: f64) -> Result<LinkingConstants> {
    let rho = params.rho;
    let (lambda_k, lambda_k1, k) = basis.rho_bracket(rho)?;
    if k == 0 && basis.harmonic_dim() == 0 {
        return Err(SolverError::Precondition(format!(
            "linking needs rho > lambda_1 or harmonic spinors; rho = {rho} lies below lambda_1 = {lambda_k1}"
        )));
    }
    let vol = basis.geometry().volume();
    let t = ((lambda_k1 + 1.0) / rho).acosh() + t_margin;
    let a = factor * (4.0 * rho * rho * vol * sinh2(t) / (8.0 * t * t * (rho * t.cosh() - lambda_k1))).sqrt();
    let mut c = LinkingConstants {
        t,
        a,
        r: 0.0,
        k_index: k,
        lambda_k,
        lambda_k1,
    };
    let n = 1001;
    let peak = (0..n)
        .map(|i| c.axis_energy(t * i as f64 / (n - 1) as f64, rho, vol))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    c.r = factor * (peak / c.coercivity(rho)).sqrt();
    Ok(c)
}

/// Constants `T`, `A`, `R` of the linking cylinder, determined in that order and certified.
pub fn linking_constants(params: &ActionParams, basis: &SpectralBasis) -> Result<LinkingConstants> {
    let c = linking_constants_with(params, basis, 1.5, 0.5)?;
    if !c.certified(params.rho, basis.geometry().volume()) {
        return Err(SolverError::Internal(format!("linking constants failed certification: {c:?}")));
    }
    Ok(c)
}

/// A discretized solid cylinder `{(t, φ + A t Ψ_{k+1}) : 0 ≤ t ≤ T, ‖φ‖_{H^{1/2}} ≤ R}` with
/// `φ ∈ H⁰ ⊕ H⁺_b`.
#[derive(Debug, Clone)]
pub struct CylinderMesh {
    pub mesh: MinmaxMesh,
    pub constants: LinkingConstants,
    /// `K = dim(H⁰ ⊕ H⁺_b)`.
    pub dim: usize,
    /// Unit directions in `H⁰ ⊕ H⁺_b` used for the radial rays.
    pub directions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderShape {
    pub n_t: usize,
    pub n_r: usize,
    /// Number of ray directions; the first `2K` are `±e_m`, the rest are random.
    pub n_sphere: usize,
}

impl Default for CylinderShape {
    fn default() -> Self {
        Self { n_t: 7, n_r: 2, n_sphere: 0 }
    }
}

/// `H^{1/2}`-unit basis `Ψ_m/√(1+λ_m)` of `H⁰ ⊕ H⁺_b`.
pub(crate) fn low_frame(params: &ActionParams, basis: &SpectralBasis) -> Result<Vec<SpinorField>> {
    Ok(basis
        .low_block(params.rho)?
        .iter()
        .map(|e| basis.unit_field(e).scaled(1.0 / (1.0 + e.value.abs()).sqrt()))
        .collect())
}

pub(crate) fn k_plus_one_spinor(c: &LinkingConstants, basis: &SpectralBasis) -> Result<SpinorField> {
    basis
        .eigenspinor(c.k_index as i64 + 1)
        .ok_or_else(|| SolverError::Resolution("lambda_{k+1} lies above the cutoff".into()))
}

fn cylinder_once(
    consts: LinkingConstants,
    shape: CylinderShape,
    params: &ActionParams,
    basis: &SpectralBasis,
    seed: u64,
) -> Result<CylinderMesh> {
    let frame = low_frame(params, basis)?;
    let k = frame.len();
    if k > MAX_LINKING_DIM {
        return Err(SolverError::Capacity(format!(
            "linking subspace has dimension {k}, above the supported {MAX_LINKING_DIM}"
        )));
    }
    if k == 0 {
        return Err(SolverError::Precondition("linking subspace is empty".into()));
    }
    if shape.n_t < 3 || shape.n_r < 1 {
        return Err(SolverError::Config("cylinder needs n_t >= 3 and n_r >= 1".into()));
    }
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for m in 0..k {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; k];
            v[m] = sign;
            directions.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while directions.len() < shape.n_sphere {
        let v: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            directions.push(v.iter().map(|x| x / n).collect());
        }
    }
    let nd = directions.len();
    let psi_k1 = k_plus_one_spinor(&consts, basis)?;

    // Node index layout: per t-level, axis node then (direction, ring) pairs.
    let per_level = 1 + nd * shape.n_r;
    let index = |i: usize, d: Option<(usize, usize)>| -> usize {
        i * per_level + d.map(|(dir, ring)| 1 + dir * shape.n_r + (ring - 1)).unwrap_or(0)
    };
    let mut specs: Vec<(usize, Option<(usize, usize)>)> = Vec::new();
    for i in 0..shape.n_t {
        specs.push((i, None));
        for dir in 0..nd {
            for ring in 1..=shape.n_r {
                specs.push((i, Some((dir, ring))));
            }
        }
    }
    let built: Vec<Result<(NehariPoint, f64)>> = specs
        .par_iter()
        .map(|&(i, d)| {
            let t = consts.t * i as f64 / (shape.n_t - 1) as f64;
            let mut free = psi_k1.scaled(consts.a * t);
            if let Some((dir, ring)) = d {
                let r = consts.r * ring as f64 / shape.n_r as f64;
                for (m, e) in frame.iter().enumerate() {
                    free.axpy(r * directions[dir][m], e);
                }
            }
            let p = fiber_solve(&basis.scalar_constant(t), &free, params, basis)?;
            let e = evaluate_j(&p.u, &p.psi, params, basis)?;
            Ok((p, e))
        })
        .collect();
    let mut nodes = Vec::with_capacity(specs.len());
    for (&(i, d), r) in specs.iter().zip(built) {
        let (point, energy) = r?;
        let ring = d.map(|(_, r)| r).unwrap_or(0);
        let fixed = i == 0 || i + 1 == shape.n_t || ring == shape.n_r;
        let mut stencil = Vec::new();
        if !fixed {
            stencil.push((index(i - 1, d), index(i + 1, d)));
            match d {
                None => {
                    for m in 0..k {
                        stencil.push((index(i, Some((2 * m + 1, 1))), index(i, Some((2 * m, 1)))));
                    }
                }
                Some((dir, ring)) => {
                    let inner = if ring == 1 { index(i, None) } else { index(i, Some((dir, ring - 1))) };
                    stencil.push((inner, index(i, Some((dir, ring + 1)))));
                }
            }
        }
        let t = consts.t * i as f64 / (shape.n_t - 1) as f64;
        let (dir_c, r_c) = d
            .map(|(dir, ring)| (dir as f64, consts.r * ring as f64 / shape.n_r as f64))
            .unwrap_or((-1.0, 0.0));
        nodes.push(MeshNode {
            point,
            energy,
            fixed,
            stencil,
            mirror_of: None,
            coords: vec![t, r_c, dir_c],
        });
    }
    let mut chains = vec![(0..shape.n_t).map(|i| index(i, None)).collect::<Vec<_>>()];
    for dir in 0..nd {
        for ring in 1..shape.n_r {
            chains.push((0..shape.n_t).map(|i| index(i, Some((dir, ring)))).collect());
        }
    }
    Ok(CylinderMesh {
        mesh: MinmaxMesh { nodes, chains },
        constants: consts,
        dim: k,
        directions,
    })
}

/// Build the linking cylinder and certify `J ≤ 1e-9` on its boundary. A failed certificate
/// triggers one rebuild with doubled margins.
pub fn build_cylinder(
    consts: LinkingConstants,
    shape: CylinderShape,
    params: &ActionParams,
    basis: &SpectralBasis,
    seed: u64,
) -> Result<CylinderMesh> {
    let cyl = cylinder_once(consts, shape, params, basis, seed)?;
    if cyl.mesh.boundary_max() <= 1e-9 {
        return Ok(cyl);
    }
    let retry = linking_constants_with(params, basis, 3.0, 1.0)?;
    let cyl = cylinder_once(retry, shape, params, basis, seed)?;
    if cyl.mesh.boundary_max() <= 1e-9 {
        return Ok(cyl);
    }
    Err(SolverError::Internal(format!(
        "cylinder boundary energy {} stays positive after doubling margins",
        cyl.mesh.boundary_max()
    )))
}

/// Squared `X`-norms entering the cone test, `(outside part, inside part)` with
/// outside `= ‖u‖² + ‖ψ⁻‖² + ‖ψ⁺_a‖²` and inside `= ‖ψ⁺_b‖² + ‖ψ⁰‖²`.
pub fn cone_parts(p: &NehariPoint, basis: &SpectralBasis) -> (f64, f64) {
    let s = &p.split;
    let h = |x: &SpinorField| hhalf_inner(x, x, basis);
    (
        h1_inner(&p.u, &p.u, basis) + h(&s.minus) + h(&s.plus_a),
        h(&s.plus_b) + h(&s.zero),
    )
}

fn scale_to_radius(u: &ScalarField, free: &SpinorField, r0: f64, params: &ActionParams, basis: &SpectralBasis) -> Result<NehariPoint> {
    let dir = FieldPair::new(u.clone(), free.clone());
    let n0 = dir.norm_x(basis);
    if n0 <= 0.0 {
        return Err(SolverError::IllPosed("zero sampling direction".into()));
    }
    let at = |t: f64| -> Result<(NehariPoint, f64)> {
        let p = fiber_solve(&u.scaled(t), &free.scaled(t), params, basis)?;
        let r = p.pair().norm_x(basis);
        Ok((p, r))
    };
    // ‖ψ⁻‖ only adds to the norm, so the radius is at least t·n0; iterate on the ratio.
    let mut t = r0 / n0;
    for _ in 0..60 {
        let (p, r) = at(t)?;
        if (r - r0).abs() <= 1e-12 * r0 {
            return Ok(p);
        }
        t *= r0 / r;
    }
    Err(SolverError::Conditioning {
        iterations: 60,
        residual: (at(t)?.1 - r0).abs(),
    })
}

/// Minimum of `J/(‖u‖²_{H¹} + ‖ψ‖²_{H^{1/2}})` over `n_samples` points of `N_ρ` at radius `r0`
/// outside the cone `‖u‖² + ‖ψ⁻‖² + ‖ψ⁺_a‖² < τ(‖ψ⁺_b‖² + ‖ψ⁰‖²)`.
pub fn coercivity_probe(
    params: &ActionParams,
    basis: &SpectralBasis,
    r0: f64,
    tau: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    basis.check_rho(params.rho)?;
    if !(r0 > 0.0 && tau > 1.0 && n_samples > 0) {
        return Err(SolverError::Config("probe needs r0 > 0, tau > 1 and n_samples > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lam_cut = 3.0 * params.rho.max(1.0);
    let slots: Vec<usize> = (0..basis.n_slots())
        .filter(|&s| basis.slot_lambda()[s] <= lam_cut)
        .collect();
    let wavevectors = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [2.0, 0.0], [0.0, 2.0]];
    let kappa = basis.geometry().wavenumber_unit();
    let max_tries = 50 * n_samples;
    let mut accepted = 0;
    let mut margin = f64::INFINITY;
    let mut tries = 0;
    while accepted < n_samples {
        if tries >= max_tries {
            return Err(SolverError::Parameter(format!(
                "cone rejection accepted {accepted} of {n_samples} samples after {tries} tries; increase tau"
            )));
        }
        tries += 1;
        let u_scale: f64 = rng.gen_range(0.0..1.0);
        let amps: Vec<(f64, f64)> = wavevectors.iter().map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let u = basis.scalar_from_fn(|x| {
            wavevectors
                .iter()
                .zip(&amps)
                .map(|(k, (a, b))| {
                    let ph = kappa * (k[0] * x[0] + k[1] * x[1]);
                    u_scale * (a * ph.cos() + b * ph.sin())
                })
                .sum()
        });
        let mut psi = basis.spinor_zeros();
        for &s in &slots {
            psi.coeffs[s] = num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let low_weight: f64 = rng.gen_range(0.0f64..1.0).powi(3);
        let plus_a = crate::spectral::project(&psi, Subspace::PlusA, basis, params.rho)?;
        let low = crate::spectral::project(&psi, Subspace::PlusB, basis, params.rho)?
            .add(&crate::spectral::project(&psi, Subspace::Zero, basis, params.rho)?);
        let free = plus_a.add(&low.scaled(low_weight));
        let p = match scale_to_radius(&u, &free, r0, params, basis) {
            Ok(p) => p,
            Err(SolverError::IllPosed(_)) => continue,
            Err(e) => return Err(e),
        };
        let (outside, inside) = cone_parts(&p, basis);
        if outside < tau * inside {
            continue;
        }
        let j = evaluate_j(&p.u, &p.psi, params, basis)?;
        margin = margin.min(j / (r0 * r0));
        accepted += 1;
    }
    Ok(margin)
}
