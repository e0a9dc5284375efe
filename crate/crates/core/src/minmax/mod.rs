//! Mountain-pass and linking min-max on the Nehari manifold: endpoint and constant selection,
//! mesh deformation, Palais–Smale diagnostics, Newton refinement and classification.

mod deflation;
mod deform;
mod diagnostics;
mod geometry;
mod mesh;
mod newton;
mod pipeline;

pub use deflation::{orbit_distance, Deflation};
pub use deform::{minmax_deform, DeformOptions, DeformOutcome, OrthogonalConstraint, TraceRow, ORTHOGONAL_TOL};
pub use diagnostics::{ps_diagnostics, PsSample};
pub use geometry::{
    build_cylinder, coercivity_probe, cone_parts, endpoint_point, linking_constants, mountain_pass_endpoint,
    CylinderMesh, CylinderShape, LinkingConstants, MAX_LINKING_DIM,
};
pub use pipeline::{run_linking, run_mountain_pass, LinkingRun, MountainPassRun};
pub use mesh::{build_path, MeshNode, MinmaxMesh};
pub use newton::{classify, newton_refine, newton_solve, semi_trivial_gap, NewtonOutcome, NEWTON_HANDOFF};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::nehari::NehariPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinmaxMode {
    MountainPass,
    Linking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinmaxConfig {
    pub mode: MinmaxMode,
    pub path_nodes: usize,
    pub descent_step: f64,
    pub backtrack: f64,
    pub grad_tol: f64,
    pub newton_tol: f64,
    pub max_outer: usize,
    pub r0: f64,
    pub tau: f64,
    pub seed: u64,
}

impl Default for MinmaxConfig {
    fn default() -> Self {
        Self {
            mode: MinmaxMode::MountainPass,
            path_nodes: 33,
            descent_step: 0.1,
            backtrack: 0.5,
            grad_tol: 1e-6,
            newton_tol: 1e-10,
            max_outer: 2000,
            r0: 0.05,
            tau: 50.0,
            seed: 0,
        }
    }
}

impl MinmaxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.path_nodes < 5 || self.path_nodes % 2 == 0 {
            return Err(SolverError::Config(format!(
                "path_nodes must be odd and >= 5, got {}",
                self.path_nodes
            )));
        }
        for (name, v) in [
            ("descent_step", self.descent_step),
            ("grad_tol", self.grad_tol),
            ("newton_tol", self.newton_tol),
            ("r0", self.r0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(SolverError::Config(format!("backtrack must lie in (0, 1), got {}", self.backtrack)));
        }
        if !(self.tau > 1.0) {
            return Err(SolverError::Config(format!("tau must exceed 1, got {}", self.tau)));
        }
        if self.max_outer == 0 {
            return Err(SolverError::Config("max_outer must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Trivial,
    SemiTrivialConstantU,
    Nontrivial,
}

/// Per-run Palais–Smale bookkeeping.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PsDiagnostics {
    pub alpha_norm: Vec<f64>,
    pub beta_norm: Vec<f64>,
    pub multiplier_norm: Vec<f64>,
    pub energies: Vec<f64>,
    /// `(‖u‖_{H¹}, ‖ψ‖_{H^{1/2}})` per iterate.
    pub norms_trace: Vec<(f64, f64)>,
    /// Norm of the constrained gradient per iterate.
    pub grad_norm: Vec<f64>,
    /// All norms finite and within a fixed factor of the initial mesh scale.
    pub bounded: bool,
}

impl PsDiagnostics {
    pub fn push(&mut self, s: &PsSample) {
        self.alpha_norm.push(s.alpha_norm);
        self.beta_norm.push(s.beta_norm);
        self.multiplier_norm.push(s.multiplier_norm);
        self.energies.push(s.energy);
        self.norms_trace.push(s.norms);
        self.grad_norm.push(s.grad_norm);
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Recompute the boundedness flag against a reference scale.
    pub fn update_bounded(&mut self, scale: f64) {
        let limit = 1e3 * scale.max(1.0);
        self.bounded = self
            .norms_trace
            .iter()
            .all(|(a, b)| a.is_finite() && b.is_finite() && *a <= limit && *b <= limit)
            && self.energies.iter().all(|e| e.is_finite());
    }
}

/// A critical-point candidate with its level and certification data.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionRecord {
    pub point: NehariPoint,
    pub level: f64,
    pub res_u: f64,
    pub res_psi: f64,
    pub classification: Classification,
    pub u_variance: f64,
    /// `‖u‖_{H¹}` and `‖ψ‖_{H^{1/2}}`.
    pub u_norm: f64,
    pub psi_norm: f64,
    /// Constrained-gradient norm at the returned point.
    pub grad_norm: f64,
    /// `‖φ‖_{H^{1/2}}` of the Lagrange multiplier at the returned point.
    pub multiplier_norm: f64,
    pub alpha_norm: f64,
    pub beta_norm: f64,
    /// Newton refinement reached `newton_tol`.
    pub refined: bool,
    pub newton_iterations: usize,
}

impl SolutionRecord {
    pub fn converged(&self, newton_tol: f64) -> bool {
        self.refined && self.res_u <= newton_tol && self.res_psi <= newton_tol
    }
}

/// Two records are geometrically distinct if their levels differ by more than `1e-6`, or
/// if both are nonzero with `H¹`-orthogonal scalar components.
pub fn geometrically_distinct(a: &SolutionRecord, b: &SolutionRecord, basis: &crate::spectral::SpectralBasis) -> bool {
    if (a.level - b.level).abs() > 1e-6 {
        return true;
    }
    let nonzero = a.classification != Classification::Trivial && b.classification != Classification::Trivial;
    nonzero && crate::spectral::h1_inner(&a.point.u, &b.point.u, basis).abs() <= 1e-8
}
