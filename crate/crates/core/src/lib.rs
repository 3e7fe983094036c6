//! Spectral enclosures for the bilayer graphene operator `D_m + V` with
//! complex matrix-valued potentials.

pub mod algebra;
pub mod discrete;
pub mod enclosure;
pub mod error;
pub mod fft2;
pub mod harness;
pub mod kernels;
pub mod potentials;
pub mod quad;
pub mod specfun;

pub use algebra::{c, frobenius_norm, matrix_abs_polar, mu_branch, Mat2C, PolarFactors, SpectralPoint, C64, I};
pub use error::{Error, Result};
pub use discrete::{complex_spectrum, DiscreteOperator, EigClass, EigEntry, EigReport};
pub use enclosure::{region_scan, EnclosureRegion, Provenance, TheoremConstants, TheoremId, Window};
pub use harness::{PotentialFamily, TrialConfig, TrialReport};
pub use potentials::{BuilderSpec, GaussianBump, GridSpec, PotentialField};
