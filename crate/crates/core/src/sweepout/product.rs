//! Equivariant min-max when `N_ρ` has a nontrivial low block `H⁰ ⊕ H⁺_b` of dimension `K`:
//! the disk is replaced by the product of a `K`-ball in the low block with the disk.

use serde::{Deserialize, Serialize};

use super::chi::SweepoutChi;
use super::disk::{disk_stencil, polar_points, DiskShape, EQUIVARIANCE_TOL};
use super::family::{equivariant_family_along, EquivariantFamily};
use crate::action::ActionParams;
use crate::error::{Result, SolverError};
use crate::minmax::{minmax_deform, DeformOptions, DeformOutcome, MeshNode, MinmaxConfig, MinmaxMesh};
use crate::spectral::{SpectralBasis, SpinorField};

/// Largest low-block dimension handled by the product mesh.
pub const MAX_PRODUCT_DIM: usize = 4;
const RADIUS_DOUBLINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductShape {
    pub disk: DiskShape,
    /// Rings along each `±e_m` ray of the low-block ball; the last one is its boundary.
    pub n_ring: usize,
}

impl Default for ProductShape {
    fn default() -> Self {
        Self {
            disk: DiskShape { n_r: 2, n_theta: 8 },
            n_ring: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProductSet {
    pub mesh: MinmaxMesh,
    pub family: EquivariantFamily,
    /// `K = dim(H⁰ ⊕ H⁺_b)`.
    pub dim: usize,
    /// Radius of the low-block ball in `H^{1/2}`.
    pub radius: f64,
    /// Largest energy over the boundary of the product.
    pub boundary_max: f64,
}

/// Index of the low-block node: `0` is the center, then `(direction, ring)` pairs.
fn ball_index(n_ring: usize, node: Option<(usize, usize)>) -> usize {
    node.map(|(d, r)| 1 + d * n_ring + (r - 1)).unwrap_or(0)
}

fn assemble(
    family: &EquivariantFamily,
    frame: &[SpinorField],
    radius: f64,
    shape: ProductShape,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<(MinmaxMesh, f64)> {
    let k = frame.len();
    let disk = shape.disk;
    let dn = disk.len();
    let half = disk.n_theta / 2;
    let mut ball: Vec<Option<(usize, usize)>> = vec![None];
    for d in 0..2 * k {
        for r in 1..=shape.n_ring {
            ball.push(Some((d, r)));
        }
    }
    let mut nodes = Vec::with_capacity(ball.len() * dn);
    let mut boundary_max = f64::NEG_INFINITY;
    for (p, b) in ball.iter().enumerate() {
        let offset = b.map(|(d, r)| {
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            frame[d / 2].scaled(sign * radius * r as f64 / shape.n_ring as f64)
        });
        let rim = b.is_some_and(|(_, r)| r == shape.n_ring);
        let polar = polar_points(family, disk, offset.as_ref(), params, basis)?;
        for (idx, pn) in polar.into_iter().enumerate() {
            let (j, i) = if idx == 0 { (0, 0) } else { ((idx - 1) / disk.n_theta + 1, (idx - 1) % disk.n_theta) };
            let on_boundary = rim || j == disk.n_r;
            if on_boundary {
                boundary_max = boundary_max.max(pn.energy);
            }
            let fixed = on_boundary || j == 0;
            let mirror_of = (j > 0 && i >= half).then(|| p * dn + disk.index(j, i - half));
            let mut stencil = Vec::new();
            if !fixed && mirror_of.is_none() {
                stencil = disk_stencil(disk, j, i, p * dn);
                match b {
                    None => {
                        for m in 0..k {
                            let minus = ball_index(shape.n_ring, Some((2 * m + 1, 1)));
                            let plus = ball_index(shape.n_ring, Some((2 * m, 1)));
                            stencil.push((minus * dn + idx, plus * dn + idx));
                        }
                    }
                    Some((d, r)) => {
                        let inner = if *r == 1 { 0 } else { ball_index(shape.n_ring, Some((*d, r - 1))) };
                        let outer = ball_index(shape.n_ring, Some((*d, r + 1)));
                        stencil.push((inner * dn + idx, outer * dn + idx));
                    }
                }
            }
            let (dir, ring) = b.map(|(d, r)| (d as f64, r as f64)).unwrap_or((-1.0, 0.0));
            nodes.push(MeshNode {
                point: pn.point,
                energy: pn.energy,
                fixed,
                stencil,
                mirror_of,
                coords: vec![pn.radius, pn.theta, dir, ring],
            });
        }
    }
    let mut chains = Vec::new();
    for p in 0..ball.len() {
        for i in 0..half {
            chains.push(
                std::iter::once(p * dn)
                    .chain((1..=disk.n_r).map(|j| p * dn + disk.index(j, i)))
                    .collect(),
            );
        }
    }
    Ok((MinmaxMesh { nodes, chains }, boundary_max))
}

/// Product of the low-block ball of radius `R` with the disk spanning a loop through
/// `(±ū, sΨ_{k+1})`. `R` starts from the coercivity of the low block against the peak of the
/// plain disk and is doubled until the whole boundary has `J ≤ 1e-9`.
pub fn build_product_set(
    chi: &SweepoutChi,
    shape: ProductShape,
    n_loop: usize,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<ProductSet> {
    let rho = params.rho;
    let low = basis.low_block(rho)?;
    let dim = low.len();
    if dim == 0 {
        return Err(SolverError::Precondition(
            "the low block is empty; use the plain equivariant disk".into(),
        ));
    }
    if dim > MAX_PRODUCT_DIM {
        return Err(SolverError::Capacity(format!(
            "low block has dimension {dim}, above the supported {MAX_PRODUCT_DIM}"
        )));
    }
    shape.disk.validate(n_loop)?;
    if shape.n_ring < 1 {
        return Err(SolverError::Config("product needs n_ring >= 1".into()));
    }
    let (_, lambda_k1, k) = basis.rho_bracket(rho)?;
    let spinor = basis
        .eigenspinor(k as i64 + 1)
        .ok_or_else(|| SolverError::Resolution("lambda_{k+1} lies above the cutoff".into()))?;
    let vol = basis.geometry().volume();
    let u_bar = ((lambda_k1 + 1.0) / rho).acosh() + 0.5;
    let s = 1.5 * (4.0 * rho * rho * u_bar.sinh().powi(2) * vol / (8.0 * (rho * u_bar.cosh() - lambda_k1))).sqrt();
    let family = equivariant_family_along(u_bar, s, &spinor, chi, params, basis, n_loop)?;

    let frame: Vec<SpinorField> = low
        .iter()
        .map(|e| basis.unit_field(e).scaled(1.0 / (1.0 + e.value.abs()).sqrt()))
        .collect();
    let coercivity = low
        .iter()
        .map(|e| (rho - e.value) / (1.0 + e.value.abs()))
        .fold(f64::INFINITY, f64::min);
    let (plain, _) = assemble(&family, &[], 0.0, shape, params, basis)?;
    let peak = plain.max_energy().max(0.0);
    let mut radius = 1.5 * (peak / (8.0 * coercivity)).sqrt();
    for _ in 0..=RADIUS_DOUBLINGS {
        let (mesh, boundary_max) = assemble(&family, &frame, radius, shape, params, basis)?;
        if boundary_max <= 1e-9 {
            return Ok(ProductSet {
                mesh,
                family,
                dim,
                radius,
                boundary_max,
            });
        }
        radius *= 2.0;
    }
    Err(SolverError::Internal(format!(
        "product boundary stays above zero up to radius {}",
        radius / 2.0
    )))
}

/// Equivariant min-max over the product set.
pub fn product_minmax(set: ProductSet, cfg: &MinmaxConfig, params: &ActionParams, basis: &SpectralBasis) -> Result<DeformOutcome> {
    cfg.validate()?;
    let outcome = minmax_deform(set.mesh, params, basis, &DeformOptions::from_config(cfg))?;
    let defect = outcome.mesh.equivariance_defect(basis);
    if defect > EQUIVARIANCE_TOL {
        return Err(SolverError::Internal(format!("equivariance defect {defect:e} on the product set")));
    }
    Ok(outcome)
}
