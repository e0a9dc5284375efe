//! ℤ₂-equivariant disks spanning the sweepout loop, and their min-max.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::EquivariantFamily;
use crate::action::{evaluate_j, ActionParams};
use crate::error::{Result, SolverError};
use crate::minmax::{minmax_deform, DeformOptions, DeformOutcome, MeshNode, MinmaxConfig, MinmaxMesh, SolutionRecord};
use crate::nehari::{fiber_solve_warm, NehariPoint};
use crate::spectral::SpectralBasis;

/// Largest mirror-pair defect tolerated on a returned disk.
pub const EQUIVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiskShape {
    /// Rings at radii `j/n_r`, `j = 1..=n_r`; the last ring is the loop itself.
    pub n_r: usize,
    /// Angular samples; even, and dividing the number of loop samples.
    pub n_theta: usize,
}

impl Default for DiskShape {
    fn default() -> Self {
        Self { n_r: 3, n_theta: 16 }
    }
}

impl DiskShape {
    pub fn validate(&self, family_len: usize) -> Result<()> {
        if self.n_r < 2 || self.n_theta < 4 || self.n_theta % 2 != 0 {
            return Err(SolverError::Config(format!(
                "disk needs n_r >= 2 and an even n_theta >= 4, got {self:?}"
            )));
        }
        if family_len % self.n_theta != 0 {
            return Err(SolverError::Config(format!(
                "disk n_theta = {} does not divide the {family_len} loop samples",
                self.n_theta
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        1 + self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of ring `j ≥ 1`, angle `i` (taken mod `n_theta`); the center is `0`.
    pub fn index(&self, j: usize, i: usize) -> usize {
        1 + (j - 1) * self.n_theta + i % self.n_theta
    }
}

/// Node data of a polar disk with ring `n_r` on the loop, before stencils are attached.
pub(crate) struct PolarNode {
    pub point: NehariPoint,
    pub energy: f64,
    pub radius: f64,
    pub theta: f64,
}

/// Points `(r u_θ, r sΨ + ψ⁻)` for one disk, optionally offset by a fixed free spinor.
pub(crate) fn polar_points(
    family: &EquivariantFamily,
    shape: DiskShape,
    offset: Option<&crate::spectral::SpinorField>,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<Vec<PolarNode>> {
    let stride = family.len() / shape.n_theta;
    let base = family.spinor.scaled(family.s);
    let mut specs: Vec<(usize, usize)> = vec![(0, 0)];
    for j in 1..=shape.n_r {
        for i in 0..shape.n_theta / 2 {
            specs.push((j, i));
        }
    }
    let built: Vec<Result<(usize, usize, NehariPoint, f64)>> = specs
        .par_iter()
        .map(|&(j, i)| {
            let r = j as f64 / shape.n_r as f64;
            let fp = &family.points[i * stride];
            let mut free = base.scaled(r);
            if let Some(o) = offset {
                free.axpy(1.0, o);
            }
            let u = fp.u.scaled(r);
            let p = fiber_solve_warm(&u, &free, Some(&fp.split.minus.scaled(r)), params, basis)?;
            let e = evaluate_j(&p.u, &p.psi, params, basis)?;
            Ok((j, i, p, e))
        })
        .collect();
    let mut slots: Vec<Option<PolarNode>> = (0..shape.len()).map(|_| None).collect();
    for b in built {
        let (j, i, point, energy) = b?;
        let idx = if j == 0 { 0 } else { shape.index(j, i) };
        let theta = family.theta_grid[i * family.len() / shape.n_theta];
        let mirror = (j > 0).then(|| NehariPoint {
            u: point.u.neg(),
            psi: point.psi.clone(),
            split: point.split.clone(),
            constraint_norm: point.constraint_norm,
        });
        let radius = j as f64 / shape.n_r as f64;
        if let Some(m) = mirror {
            slots[shape.index(j, i + shape.n_theta / 2)] = Some(PolarNode {
                point: m,
                energy,
                radius,
                theta: theta + std::f64::consts::PI,
            });
        }
        slots[idx] = Some(PolarNode {
            point,
            energy,
            radius,
            theta,
        });
    }
    Ok(slots.into_iter().map(|s| s.expect("every disk slot is built")).collect())
}

/// Stencil of the disk node at ring `j ≥ 1`, angle `i`, with node indices shifted by `offset`.
pub(crate) fn disk_stencil(shape: DiskShape, j: usize, i: usize, offset: usize) -> Vec<(usize, usize)> {
    let inner = if j == 1 { 0 } else { shape.index(j - 1, i) };
    let n = shape.n_theta;
    vec![
        (offset + inner, offset + shape.index(j + 1, i)),
        (offset + shape.index(j, i + n - 1), offset + shape.index(j, i + 1)),
    ]
}

/// Polar mesh of the disk `w(r e^{iθ}) = (r u_θ, r sΨ + ψ⁻)`. Masters have `θ ∈ [0, π)`; the
/// node at `θ + π` is the mirror `(−u, ψ)`. The loop ring is fixed, and so is the center,
/// where equivariance forces `u = 0`.
pub fn build_equivariant_disk(
    family: &EquivariantFamily,
    shape: DiskShape,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<MinmaxMesh> {
    shape.validate(family.len())?;
    let polar = polar_points(family, shape, None, params, basis)?;
    let half = shape.n_theta / 2;
    let mut nodes = Vec::with_capacity(polar.len());
    for (idx, pn) in polar.into_iter().enumerate() {
        let (j, i) = if idx == 0 { (0, 0) } else { ((idx - 1) / shape.n_theta + 1, (idx - 1) % shape.n_theta) };
        let fixed = j == 0 || j == shape.n_r;
        let mirror_of = (j > 0 && i >= half).then(|| shape.index(j, i - half));
        let stencil = if fixed || mirror_of.is_some() { Vec::new() } else { disk_stencil(shape, j, i, 0) };
        nodes.push(MeshNode {
            point: pn.point,
            energy: pn.energy,
            fixed,
            stencil,
            mirror_of,
            coords: vec![pn.radius, pn.theta],
        });
    }
    let chains = (0..half)
        .map(|i| std::iter::once(0).chain((1..=shape.n_r).map(|j| shape.index(j, i))).collect())
        .collect();
    Ok(MinmaxMesh { nodes, chains })
}

#[derive(Debug, Clone)]
pub struct DiskMinmax {
    pub record: SolutionRecord,
    /// Level of the refined top point of the deformed disk.
    pub c2: f64,
    pub boundary_max: f64,
    pub equivariance_defect: f64,
    pub outcome: DeformOutcome,
}

/// Equivariant min-max over disks spanning the loop. Mirror nodes follow their masters
/// through every move, so the deformed disk stays equivariant.
pub fn equivariant_disk_minmax(
    family: &EquivariantFamily,
    cfg: &MinmaxConfig,
    shape: DiskShape,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<DiskMinmax> {
    cfg.validate()?;
    if !(family.max_energy() < 0.0) {
        return Err(SolverError::Precondition(format!(
            "loop is not certified: max J = {}",
            family.max_energy()
        )));
    }
    let mesh = build_equivariant_disk(family, shape, params, basis)?;
    let boundary_max = mesh
        .nodes
        .iter()
        .filter(|n| n.fixed && n.coords[0] > 0.0)
        .map(|n| n.energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let outcome = minmax_deform(mesh, params, basis, &DeformOptions::from_config(cfg))?;
    let equivariance_defect = outcome.mesh.equivariance_defect(basis);
    if equivariance_defect > EQUIVARIANCE_TOL {
        return Err(SolverError::Internal(format!(
            "equivariance defect {equivariance_defect:e} after the disk deformation"
        )));
    }
    Ok(DiskMinmax {
        c2: outcome.record.level,
        record: outcome.record.clone(),
        boundary_max,
        equivariance_defect,
        outcome,
    })
}
