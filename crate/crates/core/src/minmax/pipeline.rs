//! End-to-end mountain-pass and linking runs.

use super::deform::{minmax_deform, DeformOptions, DeformOutcome};
use super::geometry::{build_cylinder, endpoint_point, linking_constants, mountain_pass_endpoint, CylinderShape, LinkingConstants};
use super::mesh::build_path;
use super::MinmaxConfig;
use crate::action::{evaluate_j, ActionParams};
use crate::error::Result;
use crate::nehari::{fiber_solve, NehariPoint};
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone)]
pub struct MountainPassRun {
    pub u_bar: f64,
    pub s: f64,
    pub endpoint: NehariPoint,
    pub endpoint_energy: f64,
    pub outcome: DeformOutcome,
}

/// Mountain pass between the origin and the certified endpoint `(ū, sΨ₁)`.
pub fn run_mountain_pass(params: &ActionParams, basis: &SpectralBasis, cfg: &MinmaxConfig) -> Result<MountainPassRun> {
    cfg.validate()?;
    let (u_bar, s) = mountain_pass_endpoint(params, basis)?;
    let endpoint = endpoint_point(u_bar, s, params, basis)?;
    let endpoint_energy = evaluate_j(&endpoint.u, &endpoint.psi, params, basis)?;
    let origin = fiber_solve(&basis.scalar_zeros(), &basis.spinor_zeros(), params, basis)?;
    let mesh = build_path(&origin, &endpoint, cfg.path_nodes, params, basis)?;
    let outcome = minmax_deform(mesh, params, basis, &DeformOptions::from_config(cfg))?;
    Ok(MountainPassRun {
        u_bar,
        s,
        endpoint,
        endpoint_energy,
        outcome,
    })
}

#[derive(Debug, Clone)]
pub struct LinkingRun {
    pub constants: LinkingConstants,
    pub dim: usize,
    pub boundary_max: f64,
    pub outcome: DeformOutcome,
}

/// Linking min-max over the certified cylinder.
pub fn run_linking(
    params: &ActionParams,
    basis: &SpectralBasis,
    cfg: &MinmaxConfig,
    shape: CylinderShape,
) -> Result<LinkingRun> {
    cfg.validate()?;
    let constants = linking_constants(params, basis)?;
    let cyl = build_cylinder(constants, shape, params, basis, cfg.seed)?;
    let boundary_max = cyl.mesh.boundary_max();
    let outcome = minmax_deform(cyl.mesh, params, basis, &DeformOptions::from_config(cfg))?;
    Ok(LinkingRun {
        constants: cyl.constants,
        dim: cyl.dim,
        boundary_max,
        outcome,
    })
}
