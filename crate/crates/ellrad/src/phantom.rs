//! Synthetic test fields.
//!
//! The transform acts on fields even in the last coordinate, so the phantom
//! constructors pin their centers to the hyperplane xₙ = 0 (and the box
//! primitive to a symmetric last-axis extent) — every phantom is even by
//! construction.  Odd or otherwise unconstrained fields for negative tests
//! enter through the [`FnField`] wrapper instead.
//!
//! The Gaussian primitive additionally exposes its analytic gradient and
//! its exact partial Fourier transform in x₁, both used by tests that need
//! quadrature-exact reference values.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

/// A single even phantom primitive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phantom {
    /// amp · exp(−Σᵢ (xᵢ−cᵢ)²/(2σᵢ²)) with cₙ = 0.
    Gaussian {
        amp: f64,
        center: Vec<f64>,
        sigma: Vec<f64>,
    },
    /// Smooth bump amp · exp(1 − 1/(1−q)), q = |x−c|²/r², supported on the
    /// closed ball of radius r about c (cₙ = 0).
    BallBump {
        amp: f64,
        center: Vec<f64>,
        radius: f64,
    },
    /// amp on the axis-aligned box [lo, hi], zero outside; the last-axis
    /// extent must satisfy loₙ = −hiₙ.
    BoxConstant {
        amp: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

/// Effective support half-width of a Gaussian, in units of σ.  Beyond this
/// the tail is below 1.3e−14 of the peak — negligible at double precision.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

impl Phantom {
    pub fn gaussian(amp: f64, center: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let n = center.len();
        if sigma.len() != n || n < 2 {
            return Err(Error::InvalidModel(
                "gaussian center and sigma must have equal length >= 2".into(),
            ));
        }
        if sigma.iter().any(|s| !(s > &0.0)) {
            return Err(Error::InvalidModel("gaussian widths must be > 0".into()));
        }
        if center[n - 1] != 0.0 {
            return Err(Error::InvalidModel(format!(
                "gaussian center must lie in the hyperplane (last coordinate {} != 0)",
                center[n - 1]
            )));
        }
        Ok(Self::Gaussian { amp, center, sigma })
    }

    pub fn ball_bump(amp: f64, center: Vec<f64>, radius: f64) -> Result<Self> {
        let n = center.len();
        if n < 2 || !(radius > 0.0) {
            return Err(Error::InvalidModel(
                "ball bump needs a center of length >= 2 and radius > 0".into(),
            ));
        }
        if center[n - 1] != 0.0 {
            return Err(Error::InvalidModel(format!(
                "ball bump center must lie in the hyperplane (last coordinate {} != 0)",
                center[n - 1]
            )));
        }
        Ok(Self::BallBump {
            amp,
            center,
            radius,
        })
    }

    pub fn box_constant(amp: f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let n = lo.len();
        if hi.len() != n || n < 2 {
            return Err(Error::InvalidModel(
                "box bounds must have equal length >= 2".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidModel("box must satisfy lo < hi per axis".into()));
        }
        if lo[n - 1] != -hi[n - 1] {
            return Err(Error::InvalidModel(
                "box last-axis extent must be symmetric about 0".into(),
            ));
        }
        Ok(Self::BoxConstant { amp, lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Gaussian { center, .. } | Self::BallBump { center, .. } => center.len(),
            Self::BoxConstant { lo, .. } => lo.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Gaussian { amp, center, sigma } => {
                let mut e = 0.0;
                for i in 0..center.len() {
                    let d = (x[i] - center[i]) / sigma[i];
                    e += d * d;
                }
                amp * (-0.5 * e).exp()
            }
            Self::BallBump {
                amp,
                center,
                radius,
            } => {
                let q = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (radius * radius);
                if q >= 1.0 {
                    0.0
                } else {
                    amp * (1.0 - 1.0 / (1.0 - q)).exp()
                }
            }
            Self::BoxConstant { amp, lo, hi } => {
                if x.iter().zip(lo).all(|(a, b)| a >= b) && x.iter().zip(hi).all(|(a, b)| a <= b) {
                    *amp
                } else {
                    0.0
                }
            }
        }
    }

    /// Analytic gradient.  Available for the Gaussian primitive, whose
    /// gradient is −(xᵢ−cᵢ)/σᵢ² times the value.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Gaussian { center, sigma, .. } => {
                let v = self.eval(x);
                (0..center.len())
                    .map(|i| -(x[i] - center[i]) / (sigma[i] * sigma[i]) * v)
                    .collect()
            }
            _ => panic!("analytic gradient is only available for Gaussian phantoms"),
        }
    }

    /// Exact partial Fourier transform in x₁ with convention
    /// ∫ f(x₁, rest) e^{−ik·x₁} dx₁, evaluated at the physical remaining
    /// coordinates `rest` (length n−1).  Available for Gaussians.
    pub fn ft_x1(&self, k: f64, rest: &[f64]) -> Complex<f64> {
        match self {
            Self::Gaussian { amp, center, sigma } => {
                debug_assert_eq!(rest.len(), center.len() - 1);
                let mut a = amp * (2.0 * std::f64::consts::PI).sqrt() * sigma[0];
                a *= (-0.5 * sigma[0] * sigma[0] * k * k).exp();
                for i in 1..center.len() {
                    let d = (rest[i - 1] - center[i]) / sigma[i];
                    a *= (-0.5 * d * d).exp();
                }
                let phase = -k * center[0];
                Complex::new(a * phase.cos(), a * phase.sin())
            }
            _ => panic!("analytic partial transform is only available for Gaussian phantoms"),
        }
    }

    /// Exact full Fourier transform ∫ f(x) e^{−ix·ζ} dx.  Available for
    /// Gaussians.
    pub fn ft(&self, zeta: &[f64]) -> Complex<f64> {
        match self {
            Self::Gaussian { amp, center, sigma } => {
                debug_assert_eq!(zeta.len(), center.len());
                let mut a = *amp;
                let mut phase = 0.0;
                for i in 0..center.len() {
                    a *= (2.0 * std::f64::consts::PI).sqrt() * sigma[i];
                    a *= (-0.5 * sigma[i] * sigma[i] * zeta[i] * zeta[i]).exp();
                    phase -= zeta[i] * center[i];
                }
                Complex::new(a * phase.cos(), a * phase.sin())
            }
            _ => panic!("analytic Fourier transform is only available for Gaussian phantoms"),
        }
    }

    /// Axis-aligned bounding box of the (effective) support.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Self::Gaussian { center, sigma, .. } => {
                let lo = center
                    .iter()
                    .zip(sigma)
                    .map(|(c, s)| c - GAUSSIAN_SUPPORT_SIGMAS * s)
                    .collect();
                let hi = center
                    .iter()
                    .zip(sigma)
                    .map(|(c, s)| c + GAUSSIAN_SUPPORT_SIGMAS * s)
                    .collect();
                (lo, hi)
            }
            Self::BallBump {
                center, radius, ..
            } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Self::BoxConstant { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }
}

/// Anything the forward transform can integrate: a scalar field with a
/// known (possibly absent) support box.
pub trait Scene: Sync {
    fn eval(&self, x: &[f64]) -> f64;
    /// Axis-aligned support box, or None when unbounded (e.g. f ≡ const).
    fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)>;
}

impl Scene for Phantom {
    fn eval(&self, x: &[f64]) -> f64 {
        Phantom::eval(self, x)
    }
    fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        Some(Phantom::bounding_box(self))
    }
}

/// A sum of phantom primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSet(pub Vec<Phantom>);

impl PhantomSet {
    pub fn dim(&self) -> usize {
        self.0.first().map(|p| p.dim()).unwrap_or(0)
    }

    /// Exact full Fourier transform of the sum (Gaussian members only).
    pub fn ft(&self, zeta: &[f64]) -> Complex<f64> {
        self.0.iter().map(|p| p.ft(zeta)).sum()
    }
}

impl Scene for PhantomSet {
    fn eval(&self, x: &[f64]) -> f64 {
        self.0.iter().map(|p| p.eval(x)).sum()
    }
    fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut it = self.0.iter();
        let (mut lo, mut hi) = it.next()?.bounding_box();
        for p in it {
            let (l, h) = p.bounding_box();
            for i in 0..lo.len() {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        Some((lo, hi))
    }
}

/// Closure-backed field for tests (odd fields, constants, ...).
pub struct FnField<F: Fn(&[f64]) -> f64 + Sync> {
    pub f: F,
    pub bbox: Option<(Vec<f64>, Vec<f64>)>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Scene for FnField<F> {
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        self.bbox.clone()
    }
}

/// Sample a scene on a grid.
pub fn sample_phantom(scene: &impl Scene, grid: Grid) -> ScalarField {
    ScalarField::tabulate(grid, |x| scene.eval(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constructors_enforce_evenness() {
        assert!(Phantom::gaussian(1.0, vec![0.3, 0.1], vec![0.2, 0.2]).is_err());
        assert!(Phantom::gaussian(1.0, vec![0.3, 0.0], vec![0.2, 0.2]).is_ok());
        assert!(Phantom::ball_bump(1.0, vec![0.0, 0.5, 0.2], 0.3).is_err());
        assert!(Phantom::box_constant(1.0, vec![-1.0, -0.5], vec![1.0, 0.4]).is_err());
        assert!(Phantom::box_constant(1.0, vec![-1.0, -0.5], vec![1.0, 0.5]).is_ok());
    }

    #[test]
    fn gaussian_even_and_peak() {
        let p = Phantom::gaussian(2.0, vec![0.4, 0.0], vec![0.3, 0.5]).unwrap();
        assert_relative_eq!(p.eval(&[0.4, 0.0]), 2.0);
        assert_relative_eq!(p.eval(&[0.1, 0.7]), p.eval(&[0.1, -0.7]), max_relative = 1e-15);
    }

    #[test]
    fn gaussian_grad_matches_finite_difference() {
        let p = Phantom::gaussian(1.5, vec![0.2, 0.0, 0.0], vec![0.3, 0.4, 0.5]).unwrap();
        let x = [0.5, -0.3, 0.8];
        let g = p.grad(&x);
        let h = 1e-6;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, max_relative = 1e-8, epsilon = 1e-10);
        }
    }

    #[test]
    fn gaussian_ft_x1_matches_quadrature() {
        let p = Phantom::gaussian(0.8, vec![0.3, 0.0], vec![0.25, 0.4]).unwrap();
        let rest = [0.2];
        for k in [0.0, 1.3, -2.7] {
            // Trapezoid over the effective support is spectrally accurate here.
            let (a, b) = (0.3 - 10.0 * 0.25, 0.3 + 10.0 * 0.25);
            let m = 4000;
            let h = (b - a) / m as f64;
            let mut s = Complex::new(0.0, 0.0);
            for j in 0..=m {
                let x1 = a + j as f64 * h;
                let w = if j == 0 || j == m { 0.5 } else { 1.0 };
                let ph = -k * x1;
                s += Complex::new(ph.cos(), ph.sin()) * (w * h * p.eval(&[x1, rest[0]]));
            }
            let exact = p.ft_x1(k, &rest);
            assert_relative_eq!(exact.re, s.re, max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(exact.im, s.im, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn ball_bump_support_is_exact() {
        let p = Phantom::ball_bump(3.0, vec![1.0, 0.0], 0.5).unwrap();
        assert_relative_eq!(p.eval(&[1.0, 0.0]), 3.0);
        assert_eq!(p.eval(&[1.5, 0.0]), 0.0);
        assert_eq!(p.eval(&[1.51, 0.0]), 0.0);
        assert!(p.eval(&[1.49, 0.0]) > 0.0);
        // decays continuously toward the boundary
        assert!(p.eval(&[1.4999, 0.0]) < 1e-100);
    }

    #[test]
    fn set_bounding_box_is_union() {
        let set = PhantomSet(vec![
            Phantom::ball_bump(1.0, vec![-1.0, 0.0], 0.5).unwrap(),
            Phantom::ball_bump(1.0, vec![2.0, 0.0], 0.25).unwrap(),
        ]);
        let (lo, hi) = Scene::bounding_box(&set).unwrap();
        assert_relative_eq!(lo[0], -1.5);
        assert_relative_eq!(hi[0], 2.25);
        assert_relative_eq!(lo[1], -0.5);
        assert_relative_eq!(hi[1], 0.5);
    }

    #[test]
    fn sampling_matches_eval() {
        let p = Phantom::gaussian(1.0, vec![0.0, 0.0], vec![0.4, 0.4]).unwrap();
        let grid = Grid::centered(vec![9, 9], vec![0.25, 0.25]).unwrap();
        let field = sample_phantom(&p, grid.clone());
        let idx = [3usize, 7usize];
        let x = [grid.coord(0, 3), grid.coord(1, 7)];
        assert_relative_eq!(field.at(&idx), p.eval(&x));
    }

    #[test]
    fn phantom_json_roundtrip() {
        let set = PhantomSet(vec![
            Phantom::gaussian(1.0, vec![0.55, 0.0], vec![0.18, 0.18]).unwrap(),
            Phantom::gaussian(0.8, vec![-0.55, 0.0], vec![0.18, 0.18]).unwrap(),
        ]);
        let s = serde_json::to_string(&set).unwrap();
        let back: PhantomSet = serde_json::from_str(&s).unwrap();
        assert_eq!(set, back);
    }
}
