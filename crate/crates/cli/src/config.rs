//! Flat JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sshg_core::action::ActionParams;
use sshg_core::minmax::{CylinderShape, MinmaxConfig, MinmaxMode};
use sshg_core::spectral::TorusGeometry;
use sshg_core::sweepout::DiskShape;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Spectrum,
    MountainPass,
    Linking,
    Multiplicity,
    Probe,
}

fn default_side_length() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_grid_n() -> usize {
    32
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// One run. Geometry, physics and solver knobs all sit at the top level; only
/// `spin_delta` is an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default = "default_side_length")]
    pub side_length: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    pub spin_delta: [f64; 2],
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,

    // Min-max overrides.
    #[serde(default)]
    pub path_nodes: Option<usize>,
    #[serde(default)]
    pub descent_step: Option<f64>,
    #[serde(default)]
    pub backtrack: Option<f64>,
    #[serde(default)]
    pub grad_tol: Option<f64>,
    #[serde(default)]
    pub newton_tol: Option<f64>,
    #[serde(default)]
    pub max_outer: Option<usize>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,

    // Linking cylinder.
    #[serde(default)]
    pub cylinder_n_t: Option<usize>,
    #[serde(default)]
    pub cylinder_n_r: Option<usize>,
    #[serde(default)]
    pub cylinder_n_sphere: Option<usize>,

    // Multiplicity.
    /// Interface budget as a fraction of the torus area.
    #[serde(default)]
    pub epsilon_fraction: Option<f64>,
    #[serde(default)]
    pub n_theta: Option<usize>,
    #[serde(default)]
    pub disk_n_r: Option<usize>,
    #[serde(default)]
    pub disk_n_theta: Option<usize>,

    // Probe.
    #[serde(default)]
    pub probe_samples: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config {
            field: "<json>".into(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_json(&text)
    }

    /// Field-level checks that need no spectral data.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| {
            Err(CliError::Config {
                field: field.into(),
                message,
            })
        };
        match (self.rho, self.mu, self.b) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            (None, None, None) if self.mode == Mode::Spectrum => {}
            (Some(_), _, _) => return bad("rho", "give either rho or (mu, b), not both".into()),
            (None, Some(_), None) | (None, None, Some(_)) => return bad("mu", "mu and b must be given together".into()),
            (None, None, None) => return bad("rho", "one of rho or (mu, b) is required".into()),
        }
        if let Err(e) = self.geometry() {
            return bad("grid_n", e.to_string());
        }
        if self.rho.is_some() || self.mu.is_some() {
            if let Err(e) = self.params() {
                return bad(if self.rho.is_some() { "rho" } else { "mu" }, e.to_string());
            }
        }
        if let Err(e) = self.minmax().validate() {
            return bad("minmax", e.to_string());
        }
        if let Some(f) = self.epsilon_fraction {
            if !(f > 0.0 && f < 0.25) {
                return bad("epsilon_fraction", format!("must lie in (0, 1/4), got {f}"));
            }
        }
        if let Some(n) = self.n_theta {
            if n < 32 || n % 2 != 0 {
                return bad("n_theta", format!("must be even and >= 32, got {n}"));
            }
        }
        if let Err(e) = self.disk_shape().validate(self.n_theta()) {
            return bad("disk_n_theta", e.to_string());
        }
        if self.probe_samples == Some(0) {
            return bad("probe_samples", "must be positive".into());
        }
        let c = self.cylinder_shape();
        if c.n_t < 3 || c.n_r < 1 {
            return bad("cylinder_n_t", format!("cylinder needs n_t >= 3 and n_r >= 1, got {c:?}"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> sshg_core::Result<TorusGeometry> {
        TorusGeometry::new(self.side_length, self.grid_n, self.spin_delta)
    }

    pub fn params(&self) -> sshg_core::Result<ActionParams> {
        match (self.rho, self.mu, self.b) {
            (Some(rho), _, _) => ActionParams::new(rho),
            (None, Some(mu), Some(b)) => ActionParams::from_physics(mu, b),
            _ => Err(sshg_core::SolverError::Config("no coupling given".into())),
        }
    }

    pub fn minmax(&self) -> MinmaxConfig {
        let d = MinmaxConfig::default();
        MinmaxConfig {
            mode: if self.mode == Mode::Linking { MinmaxMode::Linking } else { MinmaxMode::MountainPass },
            path_nodes: self.path_nodes.unwrap_or(d.path_nodes),
            descent_step: self.descent_step.unwrap_or(d.descent_step),
            backtrack: self.backtrack.unwrap_or(d.backtrack),
            grad_tol: self.grad_tol.unwrap_or(d.grad_tol),
            newton_tol: self.newton_tol.unwrap_or(d.newton_tol),
            max_outer: self.max_outer.unwrap_or(d.max_outer),
            r0: self.r0.unwrap_or(d.r0),
            tau: self.tau.unwrap_or(d.tau),
            seed: self.seed,
        }
    }

    pub fn cylinder_shape(&self) -> CylinderShape {
        let d = CylinderShape::default();
        CylinderShape {
            n_t: self.cylinder_n_t.unwrap_or(d.n_t),
            n_r: self.cylinder_n_r.unwrap_or(d.n_r),
            n_sphere: self.cylinder_n_sphere.unwrap_or(d.n_sphere),
        }
    }

    pub fn disk_shape(&self) -> DiskShape {
        let d = DiskShape::default();
        DiskShape {
            n_r: self.disk_n_r.unwrap_or(d.n_r),
            n_theta: self.disk_n_theta.unwrap_or(d.n_theta),
        }
    }

    pub fn epsilon_fraction(&self) -> f64 {
        self.epsilon_fraction.unwrap_or(0.2)
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta.unwrap_or(32)
    }

    pub fn probe_samples(&self) -> usize {
        self.probe_samples.unwrap_or(100)
    }
}
