//! Discretized paths and surfaces of Nehari points.

use rayon::prelude::*;

use crate::action::{evaluate_j, ActionParams};
use crate::error::{Result, SolverError};
use crate::nehari::{fiber_solve_warm, project_to_manifold, NehariPoint};
use crate::pair::FieldPair;
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone)]
pub struct MeshNode {
    pub point: NehariPoint,
    pub energy: f64,
    /// Boundary and endpoint nodes never move.
    pub fixed: bool,
    /// Node pairs `(a, b)` whose chord `b − a` approximates a tangent direction of the mesh here.
    pub stencil: Vec<(usize, usize)>,
    /// Set when this node is the ℤ₂ image `(−u, ψ)` of another node.
    pub mirror_of: Option<usize>,
    /// Mesh coordinates of the node (path parameter, `(t, r, direction)`, `(r, θ)`, ...).
    pub coords: Vec<f64>,
}

/// A mesh of Nehari points with fixed boundary and optional ℤ₂ pairing.
#[derive(Debug, Clone)]
pub struct MinmaxMesh {
    pub nodes: Vec<MeshNode>,
    /// Ordered node chains used for arclength reparametrization.
    pub chains: Vec<Vec<usize>>,
}

/// Coordinates in which interpolation happens: `(u, ψ⁺ + ψ⁰)`.
pub(crate) fn free_coords(p: &NehariPoint) -> FieldPair {
    FieldPair::new(p.u.clone(), p.split.free())
}

pub(crate) fn node_from_free(
    free: &FieldPair,
    warm: Option<&NehariPoint>,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<(NehariPoint, f64)> {
    let p = fiber_solve_warm(&free.u, &free.psi, warm.map(|w| &w.split.minus), params, basis)?;
    let e = evaluate_j(&p.u, &p.psi, params, basis)?;
    Ok((p, e))
}

impl MinmaxMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the highest-energy node (ties broken by lowest index).
    pub fn max_index(&self) -> usize {
        let mut best = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.energy > self.nodes[best].energy {
                best = i;
            }
        }
        best
    }

    pub fn max_energy(&self) -> f64 {
        self.nodes.iter().map(|n| n.energy).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest energy over fixed nodes.
    pub fn boundary_max(&self) -> f64 {
        self.nodes
            .iter()
            .filter(|n| n.fixed)
            .map(|n| n.energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rebuild every mirror node from its master.
    pub fn sync_mirrors(&mut self) {
        for i in 0..self.nodes.len() {
            if let Some(m) = self.nodes[i].mirror_of {
                let master = &self.nodes[m];
                let point = NehariPoint {
                    u: master.point.u.neg(),
                    psi: master.point.psi.clone(),
                    split: master.point.split.clone(),
                    constraint_norm: master.point.constraint_norm,
                };
                let energy = master.energy;
                self.nodes[i].point = point;
                self.nodes[i].energy = energy;
            }
        }
    }

    /// Largest `‖(u_i + u_m, ψ_i − ψ_m)‖_X` over mirror pairs.
    pub fn equivariance_defect(&self, basis: &SpectralBasis) -> f64 {
        self.nodes
            .iter()
            .filter_map(|n| n.mirror_of.map(|m| (n, &self.nodes[m])))
            .map(|(n, m)| {
                let mut u = n.point.u.clone();
                u.axpy(1.0, &m.point.u);
                FieldPair::new(u, n.point.psi.sub(&m.point.psi)).norm_x(basis)
            })
            .fold(0.0, f64::max)
    }

    /// Redistribute the movable nodes of every chain uniformly in product-norm arclength.
    /// Returns the reparametrized mesh without modifying `self`.
    pub fn reparametrized(&self, params: &ActionParams, basis: &SpectralBasis, skip: Option<usize>) -> Result<Self> {
        let mut out = self.clone();
        let mut jobs: Vec<(usize, FieldPair)> = Vec::new();
        for chain in &self.chains {
            if chain.len() < 3 {
                continue;
            }
            let free: Vec<FieldPair> = chain.iter().map(|&i| free_coords(&self.nodes[i].point)).collect();
            let mut cum = vec![0.0];
            for w in free.windows(2) {
                let d = w[1].sub(&w[0]).norm_x(basis);
                cum.push(cum.last().unwrap() + d);
            }
            let total = *cum.last().unwrap();
            if total <= 0.0 {
                continue;
            }
            let n = chain.len();
            for (pos, &idx) in chain.iter().enumerate() {
                let node = &self.nodes[idx];
                if node.fixed || node.mirror_of.is_some() || Some(idx) == skip || pos == 0 || pos == n - 1 {
                    continue;
                }
                let target = total * pos as f64 / (n - 1) as f64;
                let seg = cum.partition_point(|&c| c <= target).clamp(1, n - 1);
                let (a, b) = (cum[seg - 1], cum[seg]);
                let s = if b > a { (target - a) / (b - a) } else { 0.0 };
                let mut f = free[seg - 1].scaled(1.0 - s);
                f.axpy_pair(s, &free[seg]);
                jobs.push((idx, f));
            }
        }
        let results: Vec<Result<(usize, NehariPoint, f64)>> = jobs
            .par_iter()
            .map(|(idx, f)| {
                let (p, e) = node_from_free(f, Some(&self.nodes[*idx].point), params, basis)?;
                Ok((*idx, p, e))
            })
            .collect();
        for r in results {
            let (idx, p, e) = r?;
            out.nodes[idx].point = p;
            out.nodes[idx].energy = e;
        }
        out.sync_mirrors();
        Ok(out)
    }

    /// Re-evaluate all energies (used after loading or external edits).
    pub fn refresh_energies(&mut self, params: &ActionParams, basis: &SpectralBasis) -> Result<()> {
        let energies: Vec<Result<f64>> = self
            .nodes
            .par_iter()
            .map(|n| evaluate_j(&n.point.u, &n.point.psi, params, basis))
            .collect();
        for (n, e) in self.nodes.iter_mut().zip(energies) {
            n.energy = e?;
        }
        Ok(())
    }
}

impl FieldPair {
    pub(crate) fn axpy_pair(&mut self, a: f64, x: &FieldPair) {
        crate::krylov::KrylovVector::axpy(self, a, x);
    }
}

/// Straight segment between two Nehari points in `(u, ψ⁺ + ψ⁰)` coordinates, retracted onto
/// `N_ρ`. Both endpoints are fixed.
pub fn build_path(
    start: &NehariPoint,
    end: &NehariPoint,
    n_nodes: usize,
    params: &ActionParams,
    basis: &SpectralBasis,
) -> Result<MinmaxMesh> {
    if n_nodes < 3 {
        return Err(SolverError::Config(format!("a path needs at least 3 nodes, got {n_nodes}")));
    }
    let a = free_coords(start);
    let b = free_coords(end);
    let built: Vec<Result<(NehariPoint, f64)>> = (0..n_nodes)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / (n_nodes - 1) as f64;
            if i == 0 {
                return Ok((start.clone(), evaluate_j(&start.u, &start.psi, params, basis)?));
            }
            if i == n_nodes - 1 {
                return Ok((end.clone(), evaluate_j(&end.u, &end.psi, params, basis)?));
            }
            let mut f = a.scaled(1.0 - s);
            f.axpy_pair(s, &b);
            let p = project_to_manifold(&f.u, &f.psi, params, basis)?;
            let e = evaluate_j(&p.u, &p.psi, params, basis)?;
            Ok((p, e))
        })
        .collect();
    let mut nodes = Vec::with_capacity(n_nodes);
    for (i, r) in built.into_iter().enumerate() {
        let (point, energy) = r?;
        let fixed = i == 0 || i == n_nodes - 1;
        nodes.push(MeshNode {
            point,
            energy,
            fixed,
            stencil: if fixed { vec![] } else { vec![(i - 1, i + 1)] },
            mirror_of: None,
            coords: vec![i as f64 / (n_nodes - 1) as f64],
        });
    }
    Ok(MinmaxMesh {
        nodes,
        chains: vec![(0..n_nodes).collect()],
    })
}
