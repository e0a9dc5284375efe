//! ℤ₂-equivariant sweepouts of `N_ρ` and the second min-max level.

mod chi;
mod disk;
mod family;
mod product;
mod restart;

pub use chi::{build_sweepout_chi, smooth_step, ChiCertificate, SweepoutChi, CERT_SAMPLES};
pub use disk::{build_equivariant_disk, equivariant_disk_minmax, DiskMinmax, DiskShape, EQUIVARIANCE_TOL};
pub use family::{equivariant_family, equivariant_family_along, EquivariantFamily, FamilyBound, FAMILY_RETRIES};
pub use product::{build_product_set, product_minmax, ProductSet, ProductShape, MAX_PRODUCT_DIM};
pub use restart::{orthogonal_angle, orthogonal_restart, OrthogonalAngle, RestartRun, DEGENERATE_LEVEL_GAP};
