//! Numerical toolkit for a volume transform over a family of confocal
//! ellipsoids of rotation, with two independent inversion paths, a Sobolev
//! stability probe, and local-uniqueness geometry checks.
//!
//! The data model: a field f on ℝⁿ (n = 2 or 3), even in the last
//! coordinate, is integrated over solid ellipsoids of eccentricity 1/λ
//! whose foci lie in the hyperplane xₙ = 0.  The resulting sinogram is a
//! function of the ellipsoid center u (a hyperplane point) and the half
//! focal distance t.  Everything else in the crate — derived boundary data,
//! backprojection, the Fourier-slice and quadratic-phase inversion routes,
//! the stability functionals, the local-uniqueness probes — is built on
//! that forward map.

pub mod analysis;
pub mod calibrate;
pub mod chirp;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod model;
pub mod phantom;
pub mod quad;
pub mod selftest;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
