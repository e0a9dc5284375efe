//! Numerical variational solver for the super sinh-Gordon system on flat spin tori.

pub mod action;
pub mod error;
pub mod krylov;
pub mod minmax;
pub mod nehari;
pub mod pair;
pub mod spectral;
pub mod sweepout;

pub use error::{Result, SolverError};
