//! Palais–Smale test quantities along a sequence of Nehari points.

use rayon::prelude::*;

use super::PsDiagnostics;
use crate::action::{evaluate_j, ActionParams};
use crate::error::Result;
use crate::nehari::{constrained_gradient, ConstrainedGradient, NehariPoint};
use crate::spectral::{h1_inner, hhalf_inner, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsSample {
    pub alpha_norm: f64,
    pub beta_norm: f64,
    pub multiplier_norm: f64,
    pub energy: f64,
    pub norms: (f64, f64),
    pub grad_norm: f64,
}

impl PsSample {
    pub fn from_gradient(point: &NehariPoint, cg: &ConstrainedGradient, energy: f64, basis: &SpectralBasis) -> Self {
        let phi = &cg.multiplier.varphi;
        Self {
            alpha_norm: cg.alpha_norm,
            beta_norm: cg.beta_norm,
            multiplier_norm: hhalf_inner(phi, phi, basis).max(0.0).sqrt(),
            energy,
            norms: point_norms(point, basis),
            grad_norm: cg.norm,
        }
    }

    pub fn at(point: &NehariPoint, params: &ActionParams, basis: &SpectralBasis) -> Result<Self> {
        let cg = constrained_gradient(point, params, basis)?;
        let e = evaluate_j(&point.u, &point.psi, params, basis)?;
        Ok(Self::from_gradient(point, &cg, e, basis))
    }
}

/// `(‖u‖_{H¹}, ‖ψ‖_{H^{1/2}})`.
pub(crate) fn point_norms(point: &NehariPoint, basis: &SpectralBasis) -> (f64, f64) {
    (
        h1_inner(&point.u, &point.u, basis).max(0.0).sqrt(),
        hhalf_inner(&point.psi, &point.psi, basis).max(0.0).sqrt(),
    )
}

/// Evaluate the Palais–Smale quantities on every iterate of a trace. The boundedness flag
/// uses the first iterate as the reference scale.
pub fn ps_diagnostics(trace: &[NehariPoint], params: &ActionParams, basis: &SpectralBasis) -> Result<PsDiagnostics> {
    let samples: Vec<Result<PsSample>> = trace.par_iter().map(|p| PsSample::at(p, params, basis)).collect();
    let mut out = PsDiagnostics::default();
    for s in samples {
        out.push(&s?);
    }
    let scale = out.norms_trace.first().map(|(a, b)| a.hypot(*b)).unwrap_or(1.0);
    out.update_bounded(scale);
    Ok(out)
}
