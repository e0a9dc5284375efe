//! Pipeline orchestration for one configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sshg_core::action::ActionParams;
use sshg_core::minmax::{
    coercivity_probe, geometrically_distinct, run_linking, run_mountain_pass, Classification, DeformOutcome,
    LinkingConstants, PsDiagnostics, SolutionRecord, TraceRow,
};
use sshg_core::spectral::{h1_inner, SpectralBasis};
use sshg_core::sweepout::{
    build_product_set, build_sweepout_chi, equivariant_disk_minmax, equivariant_family, orthogonal_restart,
    product_minmax, EquivariantFamily, ProductShape, DEGENERATE_LEVEL_GAP, MAX_PRODUCT_DIM,
};
use sshg_core::SolverError;

use crate::checkpoint::{checkpoint_save, Checkpoint};
use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::output::{csv_bytes, fmt_f64, to_json, write_atomic};

/// Number of spectrum entries reported.
pub const SPECTRUM_ENTRIES: usize = 40;

pub const OUTPUT_FILE: &str = "run.json";
pub const SPECTRUM_CSV: &str = "spectrum.csv";
pub const THETA_SWEEP_CSV: &str = "theta_sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    /// `0` for the harmonic block, `j ≥ 1` for `λ_j`.
    pub index: i64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub harmonic_dim: usize,
    pub lambda_1: Option<f64>,
    pub lambda_1_multiplicity: Option<usize>,
    /// Harmonic block, then positive eigenvalues in increasing order.
    pub eigenvalues: Vec<SpectrumEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Levels {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub label: String,
    pub level: f64,
    pub res_u: f64,
    pub res_psi: f64,
    pub classification: Classification,
    pub u_mean: f64,
    pub u_variance: f64,
    pub u_norm: f64,
    pub psi_norm: f64,
    pub grad_norm: f64,
    pub multiplier_norm: f64,
    pub alpha_norm: f64,
    pub beta_norm: f64,
    pub refined: bool,
    pub newton_iterations: usize,
    pub converged: bool,
    pub descent_level: Option<f64>,
    pub checkpoint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub label: String,
    pub ps: PsDiagnostics,
    pub trace: Vec<TraceRow>,
    pub descent_iterations: usize,
    pub climb_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MountainPassSummary {
    pub u_bar: f64,
    pub s: f64,
    pub endpoint_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkingSummary {
    pub constants: LinkingConstants,
    /// `(lhs, rhs)` of the three defining inequalities, each requiring `lhs > rhs`.
    pub certificates: Vec<(f64, f64)>,
    pub certified: bool,
    pub dim: usize,
    pub boundary_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub r0: f64,
    pub tau: f64,
    pub samples: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub theta0: f64,
    pub endpoint_energy: f64,
    pub level: f64,
    /// `⟨u, u1⟩_{H¹}` of the returned record.
    pub inner: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplicityCase {
    /// No harmonic spinors and `ρ < λ₁`: disk spanning the loop.
    EquivariantDisk,
    /// Nontrivial low block: product of a ball in it with the disk.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySummary {
    pub case: MultiplicityCase,
    pub epsilon: f64,
    pub width_delta: f64,
    pub n_theta: usize,
    pub family_attempts: usize,
    pub u_bar: f64,
    pub s: f64,
    pub family_max_energy: f64,
    pub antisymmetry_defect: f64,
    pub c2: f64,
    pub boundary_max: f64,
    pub equivariance_defect: f64,
    pub low_block_dim: usize,
    pub low_block_radius: Option<f64>,
    pub restart: Option<RestartSummary>,
    /// The first and second records are geometrically distinct.
    pub distinct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSample {
    pub theta: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: RunConfig,
    pub rho: Option<f64>,
    pub spectrum: SpectrumSummary,
    pub levels: Levels,
    pub records: Vec<RecordSummary>,
    pub diagnostics: Vec<RunDiagnostics>,
    pub mountain_pass: Option<MountainPassSummary>,
    pub linking: Option<LinkingSummary>,
    pub multiplicity: Option<MultiplicitySummary>,
    pub probe: Option<ProbeSummary>,
    pub theta_sweep: Vec<ThetaSample>,
    /// Every returned record passed Newton refinement.
    pub converged: bool,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// Files written next to the output, relative to the output directory.
    pub files: Vec<String>,
}

impl RunOutput {
    /// 0 on success, 4 when a flagged (non-converged) candidate was written.
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else {
            4
        }
    }
}

struct Run<'a> {
    config: &'a RunConfig,
    basis: SpectralBasis,
    timings: BTreeMap<String, f64>,
    records: Vec<RecordSummary>,
    diagnostics: Vec<RunDiagnostics>,
    checkpoints: Vec<(String, Checkpoint)>,
    converged: bool,
}

impl Run<'_> {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&Self) -> Result<T, CliError>) -> Result<T, CliError> {
        let t = Instant::now();
        let out = f(self)?;
        self.timings.insert(stage.into(), t.elapsed().as_secs_f64());
        Ok(out)
    }

    fn record(&mut self, label: &str, rec: &SolutionRecord, outcome: Option<&DeformOutcome>, params: &ActionParams) {
        let newton_tol = self.config.minmax().newton_tol;
        let converged = rec.converged(newton_tol);
        self.converged &= converged;
        let file = format!("{label}.ckpt");
        self.records.push(RecordSummary {
            label: label.into(),
            level: rec.level,
            res_u: rec.res_u,
            res_psi: rec.res_psi,
            classification: rec.classification,
            u_mean: rec.point.u.mean(),
            u_variance: rec.u_variance,
            u_norm: rec.u_norm,
            psi_norm: rec.psi_norm,
            grad_norm: rec.grad_norm,
            multiplier_norm: rec.multiplier_norm,
            alpha_norm: rec.alpha_norm,
            beta_norm: rec.beta_norm,
            refined: rec.refined,
            newton_iterations: rec.newton_iterations,
            converged,
            descent_level: outcome.map(|o| o.descent_level),
            checkpoint: file.clone(),
        });
        if let Some(o) = outcome {
            self.diagnostics.push(RunDiagnostics {
                label: label.into(),
                ps: o.diagnostics.clone(),
                trace: o.trace.clone(),
                descent_iterations: o.descent_iterations,
                climb_iterations: o.climb_iterations,
            });
        }
        self.checkpoints
            .push((file, Checkpoint::new(&rec.point, rec.level, params, &self.basis)));
    }
}

fn spectrum_summary(basis: &SpectralBasis) -> SpectrumSummary {
    let h = basis.harmonic_dim();
    let eigenvalues = basis
        .harmonic_eigen()
        .iter()
        .map(|e| SpectrumEntry { index: 0, lambda: e.value })
        .chain(
            basis
                .positive_eigen()
                .iter()
                .enumerate()
                .map(|(j, e)| SpectrumEntry { index: j as i64 + 1, lambda: e.value }),
        )
        .take(SPECTRUM_ENTRIES)
        .collect();
    let first = basis.positive_levels().first().copied();
    SpectrumSummary {
        harmonic_dim: h,
        lambda_1: first.map(|l| l.0),
        lambda_1_multiplicity: first.map(|l| l.1),
        eigenvalues,
    }
}

fn config_error(field: &str, message: String) -> CliError {
    CliError::Config {
        field: field.into(),
        message,
    }
}

/// Mode-specific preconditions, checked before any min-max work starts.
fn preflight(mode: Mode, params: &ActionParams, basis: &SpectralBasis) -> Result<(), CliError> {
    let rho = params.rho;
    basis.check_rho(rho)?;
    let lambda1 = basis
        .eigenvalue(1)
        .ok_or_else(|| config_error("grid_n", "no positive eigenvalue below the cutoff".into()))?;
    let h = basis.harmonic_dim();
    match mode {
        Mode::MountainPass => {
            if h > 0 {
                return Err(config_error(
                    "spin_delta",
                    format!("mountain pass needs no harmonic spinors; this spin structure has h = {h}"),
                ));
            }
            if rho >= lambda1 {
                return Err(config_error("rho", format!("mountain pass needs rho < lambda_1 = {lambda1}, got {rho}")));
            }
        }
        Mode::Linking => {
            if h == 0 && rho < lambda1 {
                return Err(config_error(
                    "rho",
                    format!("linking needs rho > lambda_1 = {lambda1} or harmonic spinors, got {rho}"),
                ));
            }
        }
        Mode::Multiplicity | Mode::Probe | Mode::Spectrum => {}
    }
    Ok(())
}

fn theta_sweep(f: &EquivariantFamily) -> Vec<ThetaSample> {
    f.theta_grid
        .iter()
        .zip(&f.energies)
        .map(|(&theta, &energy)| ThetaSample { theta, energy })
        .collect()
}

/// Run the configured pipeline without touching the file system. Checkpoints are returned
/// alongside the output, keyed by file name.
pub fn execute(config: &RunConfig) -> Result<(RunOutput, Vec<(String, Checkpoint)>), CliError> {
    config.validate()?;
    let geom = config.geometry()?;
    let t = Instant::now();
    let basis = SpectralBasis::build_full(geom)?;
    let mut run = Run {
        config,
        basis,
        timings: BTreeMap::from([("spectral".to_string(), t.elapsed().as_secs_f64())]),
        records: Vec::new(),
        diagnostics: Vec::new(),
        checkpoints: Vec::new(),
        converged: true,
    };
    let spectrum = spectrum_summary(&run.basis);
    let mut out = RunOutput {
        config: config.clone(),
        rho: None,
        spectrum,
        levels: Levels { c1: None, c2: None },
        records: Vec::new(),
        diagnostics: Vec::new(),
        mountain_pass: None,
        linking: None,
        multiplicity: None,
        probe: None,
        theta_sweep: Vec::new(),
        converged: true,
        timings: BTreeMap::new(),
        files: Vec::new(),
    };
    if config.mode != Mode::Spectrum || config.rho.is_some() || config.mu.is_some() {
        let params = config.params()?;
        out.rho = Some(params.rho);
        preflight(config.mode, &params, &run.basis)?;
        let cfg = config.minmax();
        match config.mode {
            Mode::Spectrum => {}
            Mode::Probe => {
                let margin = run.timed("probe", |r| {
                    Ok(coercivity_probe(&params, &r.basis, cfg.r0, cfg.tau, config.probe_samples(), config.seed)?)
                })?;
                out.probe = Some(ProbeSummary {
                    r0: cfg.r0,
                    tau: cfg.tau,
                    samples: config.probe_samples(),
                    margin,
                });
            }
            Mode::MountainPass => {
                let mp = run.timed("mountain_pass", |r| Ok(run_mountain_pass(&params, &r.basis, &cfg)?))?;
                out.levels.c1 = Some(mp.outcome.record.level);
                run.record("c1", &mp.outcome.record, Some(&mp.outcome), &params);
                out.mountain_pass = Some(MountainPassSummary {
                    u_bar: mp.u_bar,
                    s: mp.s,
                    endpoint_energy: mp.endpoint_energy,
                });
            }
            Mode::Linking => {
                let lk = run.timed("linking", |r| Ok(run_linking(&params, &r.basis, &cfg, config.cylinder_shape())?))?;
                out.levels.c1 = Some(lk.outcome.record.level);
                run.record("c1", &lk.outcome.record, Some(&lk.outcome), &params);
                out.linking = Some(linking_summary(&lk, &params, &run.basis));
            }
            Mode::Multiplicity => multiplicity(&mut run, &mut out, &params)?,
        }
    }
    out.records = std::mem::take(&mut run.records);
    out.diagnostics = std::mem::take(&mut run.diagnostics);
    out.converged = run.converged;
    out.timings = run.timings;
    out.files = run.checkpoints.iter().map(|(f, _)| f.clone()).collect();
    Ok((out, run.checkpoints))
}

fn linking_summary(lk: &sshg_core::minmax::LinkingRun, params: &ActionParams, basis: &SpectralBasis) -> LinkingSummary {
    let vol = basis.geometry().volume();
    LinkingSummary {
        constants: lk.constants,
        certificates: lk.constants.certificates(params.rho, vol).to_vec(),
        certified: lk.constants.certified(params.rho, vol),
        dim: lk.dim,
        boundary_max: lk.boundary_max,
    }
}

fn multiplicity(run: &mut Run<'_>, out: &mut RunOutput, params: &ActionParams) -> Result<(), CliError> {
    let config = run.config;
    let cfg = config.minmax();
    let basis_lambda1 = run.basis.eigenvalue(1).unwrap_or(f64::INFINITY);
    let plain = run.basis.harmonic_dim() == 0 && params.rho < basis_lambda1;
    let dim = run.basis.low_block(params.rho)?.len();
    if dim > MAX_PRODUCT_DIM {
        return Err(SolverError::Capacity(format!(
            "low block has dimension {dim}, above the supported {MAX_PRODUCT_DIM}"
        ))
        .into());
    }
    let epsilon = config.epsilon_fraction() * run.basis.geometry().volume();
    let chi = build_sweepout_chi(run.basis.geometry(), epsilon)?;
    let n_theta = config.n_theta();

    if plain {
        let mp = run.timed("mountain_pass", |r| Ok(run_mountain_pass(params, &r.basis, &cfg)?))?;
        let c1 = mp.outcome.record.level;
        run.record("c1", &mp.outcome.record, Some(&mp.outcome), params);
        out.mountain_pass = Some(MountainPassSummary {
            u_bar: mp.u_bar,
            s: mp.s,
            endpoint_energy: mp.endpoint_energy,
        });
        let fam = run.timed("family", |r| Ok(equivariant_family(mp.u_bar, mp.s, &chi, params, &r.basis, n_theta)?))?;
        let disk = run.timed("disk", |r| {
            Ok(equivariant_disk_minmax(&fam, &cfg, config.disk_shape(), params, &r.basis)?)
        })?;
        run.record("c2", &disk.record, Some(&disk.outcome), params);
        let mut second = disk.record.clone();
        let mut restart = None;
        if (disk.c2 - c1).abs() <= DEGENERATE_LEVEL_GAP {
            let u1 = mp.outcome.record.point.u.clone();
            let rs = run.timed("restart", |r| Ok(orthogonal_restart(&u1, &fam, &cfg, params, &r.basis)?))?;
            run.record("restart", &rs.record, Some(&rs.outcome), params);
            restart = Some(RestartSummary {
                theta0: rs.angle.theta0,
                endpoint_energy: rs.endpoint_energy,
                level: rs.record.level,
                inner: h1_inner(&rs.record.point.u, &u1, &run.basis),
            });
            second = rs.record;
        }
        out.levels = Levels {
            c1: Some(c1),
            c2: Some(disk.c2),
        };
        out.theta_sweep = theta_sweep(&fam);
        out.multiplicity = Some(MultiplicitySummary {
            case: MultiplicityCase::EquivariantDisk,
            epsilon: fam.chi.epsilon,
            width_delta: fam.chi.width_delta,
            n_theta,
            family_attempts: fam.attempts,
            u_bar: fam.u_bar,
            s: fam.s,
            family_max_energy: fam.max_energy(),
            antisymmetry_defect: fam.antisymmetry_defect(),
            c2: disk.c2,
            boundary_max: disk.boundary_max,
            equivariance_defect: disk.equivariance_defect,
            low_block_dim: 0,
            low_block_radius: None,
            restart,
            distinct: geometrically_distinct(&mp.outcome.record, &second, &run.basis),
        });
    } else {
        let lk = run.timed("linking", |r| Ok(run_linking(params, &r.basis, &cfg, config.cylinder_shape())?))?;
        let c1 = lk.outcome.record.level;
        run.record("c1", &lk.outcome.record, Some(&lk.outcome), params);
        out.linking = Some(linking_summary(&lk, params, &run.basis));
        let mut shape = ProductShape::default();
        if config.disk_n_r.is_some() || config.disk_n_theta.is_some() {
            shape.disk = config.disk_shape();
        }
        let set = run.timed("product_set", |r| Ok(build_product_set(&chi, shape, n_theta, params, &r.basis)?))?;
        let fam = set.family.clone();
        let (dim, radius, boundary_max) = (set.dim, set.radius, set.boundary_max);
        let outcome = run.timed("product", |r| Ok(product_minmax(set, &cfg, params, &r.basis)?))?;
        let c2 = outcome.record.level;
        run.record("c2", &outcome.record, Some(&outcome), params);
        out.levels = Levels { c1: Some(c1), c2: Some(c2) };
        out.theta_sweep = theta_sweep(&fam);
        out.multiplicity = Some(MultiplicitySummary {
            case: MultiplicityCase::Product,
            epsilon: fam.chi.epsilon,
            width_delta: fam.chi.width_delta,
            n_theta,
            family_attempts: fam.attempts,
            u_bar: fam.u_bar,
            s: fam.s,
            family_max_energy: fam.max_energy(),
            antisymmetry_defect: fam.antisymmetry_defect(),
            c2,
            boundary_max,
            equivariance_defect: outcome.mesh.equivariance_defect(&run.basis),
            low_block_dim: dim,
            low_block_radius: Some(radius),
            restart: None,
            distinct: geometrically_distinct(&lk.outcome.record, &outcome.record, &run.basis),
        });
    }
    Ok(())
}

/// Write the CSV plot data of a finished run into `dir`; returns the file names.
///
/// * `spectrum.csv`: `index,lambda`
/// * `trace_<label>.csv`: `iteration,j_max,grad_norm`
/// * `theta_sweep.csv`: `theta,energy` (multiplicity runs only)
pub fn emit_plotdata(output: &RunOutput, dir: &Path) -> Result<Vec<String>, CliError> {
    let mut files = Vec::new();
    let spectrum = csv_bytes(
        &["index", "lambda"],
        output
            .spectrum
            .eigenvalues
            .iter()
            .map(|e| vec![e.index.to_string(), fmt_f64(e.lambda)]),
    )?;
    write_atomic(&dir.join(SPECTRUM_CSV), &spectrum)?;
    files.push(SPECTRUM_CSV.to_string());
    for d in &output.diagnostics {
        let name = format!("trace_{}.csv", d.label);
        let bytes = csv_bytes(
            &["iteration", "j_max", "grad_norm"],
            d.trace
                .iter()
                .map(|t| vec![t.iteration.to_string(), fmt_f64(t.j_max), fmt_f64(t.grad_norm)]),
        )?;
        write_atomic(&dir.join(&name), &bytes)?;
        files.push(name);
    }
    if !output.theta_sweep.is_empty() {
        let bytes = csv_bytes(
            &["theta", "energy"],
            output.theta_sweep.iter().map(|s| vec![fmt_f64(s.theta), fmt_f64(s.energy)]),
        )?;
        write_atomic(&dir.join(THETA_SWEEP_CSV), &bytes)?;
        files.push(THETA_SWEEP_CSV.to_string());
    }
    Ok(files)
}

/// Execute a run and write checkpoints, CSV files and `run.json` into the output directory.
/// A non-converged run is still written; its [`RunOutput::exit_code`] is 4.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let (mut out, checkpoints) = execute(config)?;
    let dir: PathBuf = config.output_dir.clone();
    for (name, ck) in &checkpoints {
        checkpoint_save(&dir.join(name), ck)?;
    }
    out.files.extend(emit_plotdata(&out, &dir)?);
    out.files.push(OUTPUT_FILE.to_string());
    write_atomic(&dir.join(OUTPUT_FILE), &to_json(&out)?)?;
    Ok(out)
}
