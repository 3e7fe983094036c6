//! Shared fixtures for the criterion benchmarks.

use bilayer_core::potentials::{build_potential, BuilderSpec, GaussianBump, GridSpec, PotentialField};
use bilayer_core::{c, Mat2C};

/// A generic complex Gaussian bump with width a seventh of the half-side.
pub fn bump(n: usize, l: f64) -> PotentialField {
    let grid = GridSpec::new(n, l).unwrap();
    let amplitude = Mat2C::new(c(1.0, 2.0), c(0.5, -0.3), c(-0.2, 0.4), c(0.0, -1.5));
    build_potential(&BuilderSpec::Gaussian(GaussianBump { amplitude, center: [0.0; 2], width: l / 7.0 }), &grid).unwrap()
}
