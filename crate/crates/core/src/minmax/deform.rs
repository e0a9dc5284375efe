//! Mesh deformation for min-max levels on `N_ρ`.
//!
//! Each outer iteration moves the highest movable nodes along the component of the
//! negative constrained gradient transverse to the mesh, with a per-node Armijo line search
//! and retraction onto `N_ρ`. The monitored maximum runs over nodes and projected edge
//! midpoints; a move that lifts an incident midpoint above it is undone, so the maximum is
//! non-increasing, which is checked every iteration. When the descent stalls, the top node is
//! pushed to a nearby critical point by reversing the gradient along the mesh directions, and
//! then handed to Newton.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::deflation::Deflation;
use super::diagnostics::PsSample;
use super::mesh::MinmaxMesh;
use super::newton::{make_record, newton_direction, newton_refine, NEWTON_HANDOFF};
use super::{MinmaxConfig, PsDiagnostics, SolutionRecord};
use crate::action::{evaluate_j, gradient_j, ActionParams, Variation};
use crate::error::{Result, SolverError};
use crate::nehari::{constrained_from_gradient, fiber_solve_warm, project_to_manifold, tangent_project, NehariPoint};
use crate::pair::FieldPair;
use crate::spectral::{h1_inner, ScalarField, SpectralBasis};

/// Largest `|⟨u, u1⟩_{H¹}|` accepted for a record produced under an [`OrthogonalConstraint`].
pub const ORTHOGONAL_TOL: f64 = 1e-8;

/// Keeps iterates in `{⟨u, u1⟩_{H¹} = 0}`.
#[derive(Debug, Clone)]
pub struct OrthogonalConstraint {
    pub u1: ScalarField,
}

impl OrthogonalConstraint {
    pub fn new(u1: ScalarField) -> Self {
        Self { u1 }
    }

    pub fn inner(&self, u: &ScalarField, basis: &SpectralBasis) -> f64 {
        h1_inner(u, &self.u1, basis)
    }

    /// `u − (⟨u, u1⟩/⟨u1, u1⟩) u1` in `H¹`.
    pub fn restrict(&self, u: &ScalarField, basis: &SpectralBasis) -> ScalarField {
        let nn = h1_inner(&self.u1, &self.u1, basis);
        if nn <= 0.0 {
            return u.clone();
        }
        let mut out = u.clone();
        out.axpy(-h1_inner(u, &self.u1, basis) / nn, &self.u1);
        out
    }

    /// Project a tangent vector of `N_ρ` onto the tangent space of the constrained set.
    pub fn project_direction(
        &self,
        point: &NehariPoint,
        t: &FieldPair,
        params: &ActionParams,
        basis: &SpectralBasis,
    ) -> Result<FieldPair> {
        let e = tangent_project(point, &FieldPair::new(self.u1.clone(), basis.spinor_zeros()), params, basis)?;
        let ee = e.dot_x(&e, basis);
        if ee <= 1e-300 {
            return Ok(t.clone());
        }
        let mut out = t.clone();
        out.axpy_pair(-t.dot_x(&e, basis) / ee, &e);
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct DeformOptions {
    pub descent_step: f64,
    pub backtrack: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    pub max_outer: usize,
    pub reparam_every: usize,
    /// Number of highest movable nodes updated per outer iteration.
    pub active_nodes: usize,
    pub grad_tol: f64,
    pub newton_tol: f64,
    pub max_climb: usize,
    /// The descent stops once the maximum dropped by less than `stall_tol·(1 + |J_max|)`
    /// over `stall_window` iterations.
    pub stall_window: usize,
    pub stall_tol: f64,
    pub orthogonal: Option<OrthogonalConstraint>,
    pub deflation: Option<Deflation>,
}

impl DeformOptions {
    pub fn from_config(cfg: &MinmaxConfig) -> Self {
        Self {
            descent_step: cfg.descent_step,
            backtrack: cfg.backtrack,
            armijo: 1e-4,
            max_outer: cfg.max_outer,
            reparam_every: 5,
            active_nodes: 16,
            grad_tol: cfg.grad_tol,
            newton_tol: cfg.newton_tol,
            max_climb: cfg.max_outer,
            stall_window: 10,
            stall_tol: 1e-7,
            orthogonal: None,
            deflation: None,
        }
    }
}

/// One row of the energy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub j_max: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DeformOutcome {
    pub mesh: MinmaxMesh,
    pub record: SolutionRecord,
    pub diagnostics: PsDiagnostics,
    pub trace: Vec<TraceRow>,
    pub descent_iterations: usize,
    pub climb_iterations: usize,
    /// Maximum over nodes and edge midpoints after the descent phase.
    pub descent_level: f64,
    /// Newton reached `newton_tol` and the constrained gradient is below `grad_tol`.
    pub converged: bool,
}

struct Ctx<'a> {
    params: &'a ActionParams,
    basis: &'a SpectralBasis,
    opts: &'a DeformOptions,
}

struct Direction {
    d: FieldPair,
    sample: PsSample,
}

struct NodeStep {
    idx: usize,
    moved: Option<(NehariPoint, f64)>,
    step: f64,
    sample: PsSample,
}

impl Ctx<'_> {
    fn objective(&self, p: &NehariPoint) -> Result<f64> {
        let mut j = evaluate_j(&p.u, &p.psi, self.params, self.basis)?;
        if let Some(d) = self.opts.deflation.as_ref().filter(|d| d.is_active()) {
            j += d.value(&p.pair(), self.basis);
        }
        Ok(j)
    }

    fn gradient(&self, p: &NehariPoint) -> Result<Variation> {
        let mut g = gradient_j(&p.u, &p.psi, self.params, self.basis)?;
        if let Some(d) = self.opts.deflation.as_ref().filter(|d| d.is_active()) {
            let dg = d.gradient(&p.pair(), self.basis);
            g.du.axpy(1.0, &dg.du);
            g.dpsi.axpy(1.0, &dg.dpsi);
        }
        Ok(g)
    }

    fn retract(&self, p: &NehariPoint, d: &FieldPair, alpha: f64) -> Result<(NehariPoint, f64)> {
        let mut u = p.u.clone();
        u.axpy(alpha, &d.u);
        if let Some(c) = &self.opts.orthogonal {
            u = c.restrict(&u, self.basis);
        }
        self.params.guard(&u)?;
        let mut psi = p.psi.clone();
        psi.axpy(alpha, &d.psi);
        let q = project_to_manifold(&u, &psi, self.params, self.basis)?;
        let e = self.objective(&q)?;
        Ok((q, e))
    }

    /// Orthonormal (in `X`) chords of the mesh at `idx`.
    fn mesh_frame(&self, mesh: &MinmaxMesh, idx: usize) -> Vec<FieldPair> {
        let mut frame: Vec<FieldPair> = Vec::new();
        for &(a, b) in &mesh.nodes[idx].stencil {
            let mut c = mesh.nodes[b].point.pair().sub(&mesh.nodes[a].point.pair());
            let n0 = c.norm_x(self.basis);
            if n0 <= 1e-14 {
                continue;
            }
            for e in &frame {
                let k = c.dot_x(e, self.basis);
                c.axpy_pair(-k, e);
            }
            let n = c.norm_x(self.basis);
            if n > 1e-8 * n0 {
                frame.push(c.scaled(1.0 / n));
            }
        }
        frame
    }

    fn mesh_reach(&self, mesh: &MinmaxMesh, idx: usize) -> f64 {
        let here = mesh.nodes[idx].point.pair();
        let d = mesh.nodes[idx]
            .stencil
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .map(|j| mesh.nodes[j].point.pair().sub(&here).norm_x(self.basis))
            .fold(f64::INFINITY, f64::min);
        0.5 * d
    }

    /// `reverse = 1` gives the transverse descent direction `−(t − P t)`; `reverse = 2` the
    /// climbing direction `−(t − 2P t)`.
    fn direction(&self, mesh: &MinmaxMesh, idx: usize, reverse: f64) -> Result<Direction> {
        let p = &mesh.nodes[idx].point;
        let g = self.gradient(p)?;
        let cg = constrained_from_gradient(p, &g, self.params, self.basis)?;
        let mut t = FieldPair::new(cg.tangent.du.clone(), cg.tangent.dpsi.clone());
        if let Some(c) = &self.opts.orthogonal {
            t = c.project_direction(p, &t, self.params, self.basis)?;
        }
        let mut sample = PsSample::from_gradient(p, &cg, mesh.nodes[idx].energy, self.basis);
        sample.grad_norm = t.norm_x(self.basis);
        let mut d = t.scaled(-1.0);
        for e in self.mesh_frame(mesh, idx) {
            let k = t.dot_x(&e, self.basis);
            d.axpy_pair(reverse * k, &e);
        }
        Ok(Direction { d, sample })
    }

    fn descend_node(&self, mesh: &MinmaxMesh, idx: usize, step: f64) -> Result<NodeStep> {
        let dir = self.direction(mesh, idx, 1.0)?;
        let node = &mesh.nodes[idx];
        let dn2 = dir.d.dot_x(&dir.d, self.basis);
        let transverse = dn2.max(0.0).sqrt();
        let cap = 16.0 * self.opts.descent_step;
        // A node may not move farther than half the distance to its nearest stencil
        // neighbor; larger jumps let a coarse mesh slip past the linking set.
        let reach = self.mesh_reach(mesh, idx);
        let mut alpha = step.min(reach / transverse.max(1e-300));
        let mut moved = None;
        if transverse > 1e-14 {
            for _ in 0..30 {
                if let Ok((q, e)) = self.retract(&node.point, &dir.d, alpha) {
                    if e <= node.energy - self.opts.armijo * alpha * dn2 {
                        moved = Some((q, e));
                        break;
                    }
                }
                alpha *= self.opts.backtrack;
            }
        }
        let step = if moved.is_some() {
            (alpha * 2.0).min(cap)
        } else {
            self.opts.descent_step
        };
        Ok(NodeStep {
            idx,
            moved,
            step,
            sample: dir.sample,
        })
    }
}

impl Ctx<'_> {
    /// Translate the endpoints of edge `k` along the transverse descent direction at its
    /// midpoint, doubling the shift when one endpoint is fixed. Accepted only with sufficient
    /// decrease at the midpoint and no incident node or edge above `top`.
    fn edge_move(&self, mesh: &MinmaxMesh, edges: &Edges, k: usize, top: f64, step: f64) -> Result<Option<(MinmaxMesh, Edges)>> {
        let (a, b) = edges.list[k];
        let ends: Vec<(usize, f64)> = [a, b]
            .into_iter()
            .filter(|&n| !mesh.nodes[n].fixed)
            .map(|n| (master(mesh, n), if mesh.nodes[n].mirror_of.is_some() { -1.0 } else { 1.0 }))
            .collect();
        if ends.is_empty() || (ends.len() == 2 && ends[0].0 == ends[1].0) {
            return Ok(None);
        }
        let weight = if ends.len() == 1 { 2.0 } else { 1.0 };
        let (m, _) = edges.midpoint(self, mesh, k)?;
        let mut probe = mesh.clone();
        let mut stencil = vec![(a, b)];
        stencil.extend(mesh.nodes[a].stencil.iter().copied());
        stencil.extend(mesh.nodes[b].stencil.iter().copied());
        probe.nodes.push(super::mesh::MeshNode {
            point: m,
            energy: top,
            fixed: false,
            stencil,
            mirror_of: None,
            coords: Vec::new(),
        });
        let dir = self.direction(&probe, probe.len() - 1, 1.0)?;
        let dn2 = dir.d.dot_x(&dir.d, self.basis);
        if dn2 <= 1e-28 {
            return Ok(None);
        }
        let reach = ends
            .iter()
            .map(|&(n, _)| self.mesh_reach(mesh, n))
            .fold(f64::INFINITY, f64::min);
        let masters: Vec<usize> = ends.iter().map(|e| e.0).collect();
        let mut alpha = step.min(reach / (weight * dn2.sqrt()));
        for _ in 0..12 {
            let mut trial = mesh.clone();
            let mut ok = true;
            for &(n, sign) in &ends {
                let disp = FieldPair::new(dir.d.u.scaled(sign), dir.d.psi.clone());
                match self.retract(&mesh.nodes[n].point, &disp, weight * alpha) {
                    Ok((q, e)) if e <= top => {
                        trial.nodes[n].point = q;
                        trial.nodes[n].energy = e;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                trial.sync_mirrors();
                let mut te = edges.clone();
                let touched = te.touching(&with_mirrors(&trial, &masters));
                if te.update(self, &trial, &touched).is_ok() {
                    let worst = touched.iter().map(|&j| te.energy[j]).fold(f64::NEG_INFINITY, f64::max);
                    if te.energy[k] <= top - self.opts.armijo * alpha * dn2 && worst <= top {
                        return Ok(Some((trial, te)));
                    }
                }
            }
            alpha *= self.opts.backtrack;
        }
        Ok(None)
    }
}

fn master(mesh: &MinmaxMesh, idx: usize) -> usize {
    mesh.nodes[idx].mirror_of.unwrap_or(idx)
}

/// Midpoints of mesh edges, projected onto `N_ρ`. Their energies are part of the monitored
/// maximum, so the descent cannot lower every node while the surface between them stays high.
#[derive(Clone)]
struct Edges {
    list: Vec<(usize, usize)>,
    energy: Vec<f64>,
    incident: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Peak {
    Node(usize),
    Edge(usize),
}

impl Edges {
    fn new(mesh: &MinmaxMesh) -> Self {
        let mut list: Vec<(usize, usize)> = Vec::new();
        for (i, n) in mesh.nodes.iter().enumerate() {
            for &(a, b) in &n.stencil {
                for j in [a, b] {
                    let e = (i.min(j), i.max(j));
                    if e.0 != e.1 && !(mesh.nodes[e.0].fixed && mesh.nodes[e.1].fixed) {
                        list.push(e);
                    }
                }
            }
        }
        list.sort_unstable();
        list.dedup();
        let mut incident = vec![Vec::new(); mesh.len()];
        for (k, &(a, b)) in list.iter().enumerate() {
            incident[a].push(k);
            incident[b].push(k);
        }
        let energy = vec![f64::NEG_INFINITY; list.len()];
        Self { list, energy, incident }
    }

    fn midpoint(&self, ctx: &Ctx<'_>, mesh: &MinmaxMesh, k: usize) -> Result<(NehariPoint, f64)> {
        let (a, b) = self.list[k];
        let pa = &mesh.nodes[a].point;
        let pb = &mesh.nodes[b].point;
        let mut u = pa.u.scaled(0.5);
        u.axpy(0.5, &pb.u);
        let mut free = pa.split.free().scaled(0.5);
        free.axpy(0.5, &pb.split.free());
        let mut warm = pa.split.minus.scaled(0.5);
        warm.axpy(0.5, &pb.split.minus);
        let p = fiber_solve_warm(&u, &free, Some(&warm), ctx.params, ctx.basis)?;
        let e = ctx.objective(&p)?;
        Ok((p, e))
    }

    fn update(&mut self, ctx: &Ctx<'_>, mesh: &MinmaxMesh, which: &[usize]) -> Result<()> {
        let vals: Vec<Result<f64>> = which.par_iter().map(|&k| Ok(self.midpoint(ctx, mesh, k)?.1)).collect();
        for (&k, v) in which.iter().zip(vals) {
            self.energy[k] = v?;
        }
        Ok(())
    }

    fn refresh_all(&mut self, ctx: &Ctx<'_>, mesh: &MinmaxMesh) -> Result<()> {
        let all: Vec<usize> = (0..self.list.len()).collect();
        self.update(ctx, mesh, &all)
    }

    fn touching(&self, nodes: &[usize]) -> Vec<usize> {
        let mut ks: Vec<usize> = nodes.iter().flat_map(|&i| self.incident[i].iter().copied()).collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    fn peak(&self, mesh: &MinmaxMesh) -> (f64, Peak) {
        let i = mesh.max_index();
        let mut best = (mesh.nodes[i].energy, Peak::Node(i));
        for (k, &e) in self.energy.iter().enumerate() {
            if e > best.0 {
                best = (e, Peak::Edge(k));
            }
        }
        best
    }

    /// Node energy raised to the largest incident edge energy.
    fn key(&self, mesh: &MinmaxMesh, i: usize) -> f64 {
        self.incident[i]
            .iter()
            .map(|&k| self.energy[k])
            .fold(mesh.nodes[i].energy, f64::max)
    }
}

/// The `k` highest movable masters. Nodes whose key is not above the boundary maximum cannot
/// carry the maximum and are left alone; `J` is unbounded below on `N_ρ`, so moving them would
/// only push them towards `|u| → ∞`.
fn active_set(mesh: &MinmaxMesh, edges: &Edges, k: usize) -> Vec<usize> {
    let floor = mesh.boundary_max();
    let keys: Vec<f64> = (0..mesh.len()).map(|i| edges.key(mesh, i)).collect();
    let mut idx: Vec<usize> = (0..mesh.len())
        .filter(|&i| !mesh.nodes[i].fixed && mesh.nodes[i].mirror_of.is_none() && keys[i] > floor)
        .collect();
    idx.sort_by(|&a, &b| {
        keys[b]
            .total_cmp(&keys[a])
            .then(mesh.nodes[b].energy.total_cmp(&mesh.nodes[a].energy))
            .then(a.cmp(&b))
    });
    idx.truncate(k.max(1));
    idx
}

fn with_mirrors(mesh: &MinmaxMesh, nodes: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = nodes.to_vec();
    for (j, n) in mesh.nodes.iter().enumerate() {
        if n.mirror_of.is_some_and(|m| nodes.contains(&m)) {
            out.push(j);
        }
    }
    out
}

/// Deform `mesh` towards a min-max configuration and refine its top point.
///
/// Fixed nodes never move. Exhausting the budget is not an error: the best candidate is
/// returned with `converged = false`.
pub fn minmax_deform(
    mesh: MinmaxMesh,
    params: &ActionParams,
    basis: &SpectralBasis,
    opts: &DeformOptions,
) -> Result<DeformOutcome> {
    let ctx = Ctx { params, basis, opts };
    let mut mesh = mesh;
    if mesh.nodes.iter().all(|n| n.fixed) {
        return Err(SolverError::Precondition("mesh has no movable nodes".into()));
    }
    if opts.deflation.as_ref().is_some_and(|d| d.is_active()) {
        for n in mesh.nodes.iter_mut() {
            n.energy = ctx.objective(&n.point)?;
        }
    }
    let fixed_snapshot: Vec<(usize, f64)> = mesh
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.fixed)
        .map(|(i, n)| (i, n.energy))
        .collect();
    let mut edges = Edges::new(&mesh);
    edges.refresh_all(&ctx, &mesh)?;
    let (start_peak, _) = edges.peak(&mesh);
    if mesh.boundary_max() >= start_peak {
        return Err(SolverError::Precondition(format!(
            "boundary maximum {} is not below the interior maximum {start_peak}",
            mesh.boundary_max()
        )));
    }

    let mut steps = vec![opts.descent_step; mesh.len()];
    let mut edge_step = opts.descent_step;
    let mut diagnostics = PsDiagnostics::default();
    let mut trace = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut descent_iterations = 0;

    for outer in 0..opts.max_outer {
        let (before, peak) = edges.peak(&mesh);
        let active = active_set(&mesh, &edges, opts.active_nodes);
        let results: Vec<Result<NodeStep>> = active
            .par_iter()
            .map(|&i| ctx.descend_node(&mesh, i, steps[i]))
            .collect();
        let mut proposals = Vec::new();
        let mut node_samples = Vec::new();
        for r in results {
            let s = r?;
            steps[s.idx] = s.step;
            node_samples.push((s.idx, s.sample));
            if let Some(m) = s.moved {
                proposals.push((s.idx, m));
            }
        }
        let sample = match peak {
            Peak::Node(i) => match node_samples.iter().find(|(j, _)| *j == master(&mesh, i)) {
                Some((_, s)) => *s,
                None => PsSample::at(&mesh.nodes[i].point, params, basis)?,
            },
            Peak::Edge(k) => PsSample::at(&edges.midpoint(&ctx, &mesh, k)?.0, params, basis)?,
        };
        diagnostics.push(&sample);
        trace.push(TraceRow {
            iteration: outer,
            j_max: before,
            grad_norm: sample.grad_norm,
        });
        descent_iterations = outer + 1;
        if sample.grad_norm <= opts.grad_tol {
            break;
        }
        let no_proposals = proposals.is_empty();

        // Apply all moves, then undo those that lift an incident edge above the old peak.
        let old: Vec<(usize, NehariPoint, f64)> = proposals
            .iter()
            .map(|(i, _)| (*i, mesh.nodes[*i].point.clone(), mesh.nodes[*i].energy))
            .collect();
        for (i, (p, e)) in proposals {
            mesh.nodes[i].point = p;
            mesh.nodes[i].energy = e;
        }
        mesh.sync_mirrors();
        let mut moved: Vec<usize> = old.iter().map(|(i, _, _)| *i).collect();
        let mut check = edges.touching(&with_mirrors(&mesh, &moved));
        loop {
            edges.update(&ctx, &mesh, &check)?;
            let bad: Vec<usize> = check.iter().copied().filter(|&k| edges.energy[k] > before).collect();
            if bad.is_empty() {
                break;
            }
            let mut revert: Vec<usize> = Vec::new();
            for k in bad {
                let (a, b) = edges.list[k];
                for n in [a, b] {
                    let m = master(&mesh, n);
                    if moved.contains(&m) && !revert.contains(&m) {
                        revert.push(m);
                    }
                }
            }
            if revert.is_empty() {
                return Err(SolverError::Internal("edge above the peak with no moved endpoint".into()));
            }
            for (i, p, e) in old.iter().filter(|(i, _, _)| revert.contains(i)) {
                mesh.nodes[*i].point = p.clone();
                mesh.nodes[*i].energy = *e;
                steps[*i] *= opts.backtrack;
            }
            moved.retain(|i| !revert.contains(i));
            mesh.sync_mirrors();
            check = edges.touching(&with_mirrors(&mesh, &revert));
        }

        // Node moves cannot lower a peak that sits on an edge midpoint without lifting it.
        let mut edge_moved = false;
        if let (top, Peak::Edge(k)) = edges.peak(&mesh) {
            match ctx.edge_move(&mesh, &edges, k, top, edge_step)? {
                Some((m, e)) => {
                    mesh = m;
                    edges = e;
                    edge_moved = true;
                    edge_step = (2.0 * edge_step).min(16.0 * opts.descent_step);
                }
                None => edge_step = opts.descent_step,
            }
        }
        if no_proposals && !edge_moved {
            break;
        }

        if (outer + 1) % opts.reparam_every.max(1) == 0 {
            // Linear interpolation keeps `⟨u, u1⟩ = 0`, so only the deflated objective needs
            // re-evaluation.
            let mut rep = mesh.reparametrized(params, basis, None)?;
            if opts.deflation.as_ref().is_some_and(|d| d.is_active()) {
                for n in rep.nodes.iter_mut().filter(|n| !n.fixed) {
                    n.energy = ctx.objective(&n.point)?;
                }
            }
            let mut rep_edges = Edges::new(&rep);
            rep_edges.refresh_all(&ctx, &rep)?;
            if rep_edges.peak(&rep).0 <= edges.peak(&mesh).0 {
                mesh = rep;
                edges = rep_edges;
            }
        }
        let (after, _) = edges.peak(&mesh);
        check_invariants(&mesh, &fixed_snapshot, before, after)?;

        history.push(after);
        if history.len() > opts.stall_window {
            let old = history[history.len() - 1 - opts.stall_window];
            if old - after <= opts.stall_tol * (1.0 + after.abs()) {
                break;
            }
        }
    }
    let (descent_level, peak) = edges.peak(&mesh);

    // Climb from the peak. An edge peak is inserted as a temporary node spanned by its edge.
    let mut climb_mesh = mesh.clone();
    let top = match peak {
        Peak::Node(i) => master(&mesh, i),
        Peak::Edge(k) => {
            let (p, e) = edges.midpoint(&ctx, &mesh, k)?;
            let (a, b) = edges.list[k];
            let mut stencil = vec![(a, b)];
            stencil.extend(mesh.nodes[a].stencil.iter().copied().filter(|&(x, y)| x != b && y != b));
            climb_mesh.nodes.push(super::mesh::MeshNode {
                point: p,
                energy: e,
                fixed: false,
                stencil,
                mirror_of: None,
                coords: Vec::new(),
            });
            climb_mesh.nodes.len() - 1
        }
    };
    let mut x = climb_mesh.nodes[top].point.clone();
    let mut climb_iterations = 0;
    let mut alpha = opts.descent_step;
    let mut dir = ctx.direction(&climb_mesh, top, 2.0)?;
    while climb_iterations < opts.max_climb && dir.sample.grad_norm > NEWTON_HANDOFF {
        let cur = dir.sample.grad_norm;
        let mut accepted = false;
        // A retracted Newton step first; it is kept only if the constrained gradient drops.
        if opts.deflation.is_none() && opts.orthogonal.is_none() {
            if let Ok((dx, _)) = newton_direction(&x.pair(), params, basis, 1e-6) {
                let mut beta = 1.0;
                for _ in 0..4 {
                    if let Ok((q, e)) = ctx.retract(&x, &dx, beta) {
                        climb_mesh.nodes[top].point = q.clone();
                        climb_mesh.nodes[top].energy = e;
                        let nd = ctx.direction(&climb_mesh, top, 2.0)?;
                        if nd.sample.grad_norm < cur {
                            x = q;
                            dir = nd;
                            accepted = true;
                            break;
                        }
                    }
                    beta *= 0.5;
                }
            }
        }
        for _ in 0..20 {
            if accepted {
                break;
            }
            if let Ok((q, e)) = ctx.retract(&x, &dir.d, alpha) {
                climb_mesh.nodes[top].point = q.clone();
                climb_mesh.nodes[top].energy = e;
                let nd = ctx.direction(&climb_mesh, top, 2.0)?;
                if nd.sample.grad_norm < cur {
                    x = q;
                    dir = nd;
                    accepted = true;
                    alpha = (alpha * 1.5).min(16.0 * opts.descent_step);
                    break;
                }
            }
            alpha *= opts.backtrack;
        }
        if !accepted {
            climb_mesh.nodes[top].point = x.clone();
            break;
        }
        climb_iterations += 1;
        diagnostics.push(&dir.sample);
        trace.push(TraceRow {
            iteration: descent_iterations + climb_iterations - 1,
            j_max: dir.sample.energy,
            grad_norm: dir.sample.grad_norm,
        });
    }

    let mut record = match newton_refine(&x, params, basis, opts.newton_tol) {
        Ok(rec) => rec,
        Err(SolverError::Precondition(_)) => make_record(x.clone(), params, basis, false, 0)?,
        Err(e) => return Err(e),
    };
    // Newton works on the full system and may leave the slice `⟨u, u1⟩ = 0`.
    if let Some(oc) = &opts.orthogonal {
        if oc.inner(&record.point.u, basis).abs() > ORTHOGONAL_TOL {
            record = make_record(x.clone(), params, basis, false, 0)?;
        }
    }
    let final_sample = PsSample {
        alpha_norm: record.alpha_norm,
        beta_norm: record.beta_norm,
        multiplier_norm: record.multiplier_norm,
        energy: record.level,
        norms: (record.u_norm, record.psi_norm),
        grad_norm: record.grad_norm,
    };
    diagnostics.push(&final_sample);
    trace.push(TraceRow {
        iteration: trace.len(),
        j_max: record.level,
        grad_norm: record.grad_norm,
    });
    let scale = mesh
        .nodes
        .iter()
        .map(|n| n.point.pair().norm_x(basis))
        .fold(0.0, f64::max);
    diagnostics.update_bounded(scale);
    let converged = record.converged(opts.newton_tol) && record.grad_norm <= opts.grad_tol;
    Ok(DeformOutcome {
        mesh,
        record,
        diagnostics,
        trace,
        descent_iterations,
        climb_iterations,
        descent_level,
        converged,
    })
}

fn check_invariants(mesh: &MinmaxMesh, fixed: &[(usize, f64)], before: f64, after: f64) -> Result<()> {
    for &(i, e) in fixed {
        if mesh.nodes[i].energy.to_bits() != e.to_bits() {
            return Err(SolverError::Internal(format!("fixed node {i} moved")));
        }
    }
    if after > before + 1e-12 * (1.0 + before.abs()) {
        return Err(SolverError::Internal(format!(
            "mesh maximum rose from {before} to {after} during descent"
        )));
    }
    Ok(())
}
