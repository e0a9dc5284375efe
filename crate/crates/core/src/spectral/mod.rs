//! Flat-torus spin geometry: grids, spin structures, the Dirac and Laplace operators in
//! Fourier form, the Dirac eigenbasis and the Sobolev structures built on it.

mod basis;
mod fft;
mod field;
mod geometry;
mod ops;

pub use basis::{RealEigen, SpectralBasis, SpinMode, Subspace, SPECTRAL_GAP_TOL};
pub use field::{ScalarField, SpinorField};
pub use geometry::TorusGeometry;
pub use ops::{
    clifford_generators, clifford_symbol, dirac_apply, fractional_apply, h1_inner, h1_operator, hhalf_inner,
    hhalf_operator, hm1_inner, hmhalf_inner, l2_scalar, laplace_apply, omega_mult, project, quaternion_frame,
    quaternion_j, riesz_h1, riesz_hhalf, sobolev_inner, FieldRef, SobolevSpace,
};
pub(crate) use ops::{dirac_diag, project_unchecked, scalar_multiplier, spinor_multiplier};
