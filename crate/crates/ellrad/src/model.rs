//! Fixed-eccentricity ellipsoid geometry.
//!
//! The data acquisition geometry is a family of solid ellipsoids of rotation
//! in ℝⁿ with eccentricity 1/λ (λ > 1) whose foci lie in the hyperplane
//! xₙ = 0 on a line parallel to the x₁ axis.  An ellipsoid is parameterized
//! by its center u ∈ ℝ^{n−1} (a point of the hyperplane) and the half focal
//! distance t > 0; its semi-axes are λt along x₁ and νt along every other
//! axis, where ν = √(λ² − 1).
//!
//! Membership:  (x₁−u₁)²/λ² + |x̃−ũ|²/ν² + xₙ²/ν² ≤ t².
//!
//! The same quadratic form with the center taken in the hyperplane defines
//! the scaled distance [`EccentricityModel::scaled_dist`] used by the back
//! projection and by the local-uniqueness sets.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Unit-ball volume Vₙ for the supported dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => unreachable!("dimension restricted to 2 and 3"),
    }
}

/// Surface measure |S^{n−1}| of the unit sphere.
pub fn unit_sphere_area(n: usize) -> f64 {
    match n {
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => unreachable!("dimension restricted to 2 and 3"),
    }
}

/// The fixed geometry of the ellipsoid family: dimension n, eccentricity
/// parameter λ, ν = √(λ²−1), and the Jacobian factor C(λ) = λ·ν^{n−1} of the
/// change of variables that maps the unit ball onto an ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EccentricityModel {
    pub n: usize,
    pub lambda: f64,
    pub nu: f64,
    pub c_lambda: f64,
}

impl EccentricityModel {
    /// Build the model, validating λ > 1 and n ∈ {2, 3}.
    pub fn new(lambda: f64, n: usize) -> Result<Self> {
        if !(n == 2 || n == 3) {
            return Err(Error::InvalidModel(format!(
                "dimension n={n} not supported (need 2 or 3)"
            )));
        }
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::InvalidModel(format!(
                "lambda={lambda} must be a finite number > 1"
            )));
        }
        let nu = (lambda * lambda - 1.0).sqrt();
        let c_lambda = lambda * nu.powi(n as i32 - 1);
        Ok(Self {
            n,
            lambda,
            nu,
            c_lambda,
        })
    }

    /// Per-axis semi-axis scale factors (λ, ν, ..., ν) of the unit ellipsoid.
    pub fn axis_scales(&self) -> Vec<f64> {
        let mut s = vec![self.nu; self.n];
        s[0] = self.lambda;
        s
    }

    /// Scaled distance between a point x ∈ ℝⁿ and a hyperplane point
    /// u ∈ ℝ^{n−1}:
    ///
    ///   ρ(x, u) = √( (x₁−u₁)²/λ² + |x̃−ũ|²/ν² + xₙ²/ν² ).
    ///
    /// x lies in the ellipsoid with center u and half focal distance t
    /// exactly when ρ(x, u) ≤ t.
    pub fn scaled_dist(&self, x: &[f64], u: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(u.len(), self.n - 1);
        let mut q = ((x[0] - u[0]) / self.lambda).powi(2);
        for i in 1..self.n - 1 {
            q += ((x[i] - u[i]) / self.nu).powi(2);
        }
        q += (x[self.n - 1] / self.nu).powi(2);
        q.sqrt()
    }
}

/// One solid ellipsoid E_{u,t} of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub model: EccentricityModel,
    /// Center in the hyperplane, length n−1.
    pub u: Vec<f64>,
    /// Half focal distance, > 0.
    pub t: f64,
}

impl Ellipsoid {
    pub fn new(model: EccentricityModel, u: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() != model.n - 1 {
            return Err(Error::InvalidModel(format!(
                "center has {} coordinates, expected {}",
                u.len(),
                model.n - 1
            )));
        }
        if !(t > 0.0) {
            return Err(Error::InvalidModel(format!(
                "half focal distance t={t} must be > 0"
            )));
        }
        Ok(Self { model, u, t })
    }

    /// Closed-set membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.model.scaled_dist(x, &self.u) <= self.t
    }

    /// The two foci (u₁ ± t, ũ, 0).
    pub fn foci(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.model.n;
        let mut c1 = vec![0.0; n];
        let mut c2 = vec![0.0; n];
        c1[..n - 1].copy_from_slice(&self.u);
        c2[..n - 1].copy_from_slice(&self.u);
        c1[0] += self.t;
        c2[0] -= self.t;
        (c1, c2)
    }

    /// Analytic volume Vₙ · λ · ν^{n−1} · tⁿ (semi-axes λt, νt, ..., νt).
    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.model.n) * self.model.c_lambda * self.t.powi(self.model.n as i32)
    }
}

/// The three regions of the local-data uniqueness statement:
///
/// * U — the data patch {(u,t) : |u−u⁰| < ε, 0 ≤ t < T},
/// * V — the open ellipsoidal region {x : ρ(x, u⁰) < T},
/// * W — the data cone {(u,t) : |u−u⁰| + t < T}.
///
/// Data vanishing on U forces the field to vanish on V and the data to
/// vanish on W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDataSets {
    pub model: EccentricityModel,
    /// Patch center u⁰ in the hyperplane, length n−1.
    pub u0: Vec<f64>,
    pub epsilon: f64,
    pub t_cap: f64,
}

impl LocalDataSets {
    pub fn new(model: EccentricityModel, u0: Vec<f64>, epsilon: f64, t_cap: f64) -> Result<Self> {
        if u0.len() != model.n - 1 {
            return Err(Error::InvalidModel(format!(
                "u0 has {} coordinates, expected {}",
                u0.len(),
                model.n - 1
            )));
        }
        if !(epsilon > 0.0) || !(t_cap > 0.0) {
            return Err(Error::InvalidModel(
                "epsilon and T must both be > 0".into(),
            ));
        }
        Ok(Self {
            model,
            u0,
            epsilon,
            t_cap,
        })
    }

    fn hyperplane_dist(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.u0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Strict membership of a data point (u, t) in the patch U.
    pub fn in_u(&self, u: &[f64], t: f64) -> bool {
        self.hyperplane_dist(u) < self.epsilon && (0.0..self.t_cap).contains(&t)
    }

    /// Strict membership of a field point x in the region V.
    pub fn in_v(&self, x: &[f64]) -> bool {
        self.model.scaled_dist(x, &self.u0) < self.t_cap
    }

    /// Strict membership of a data point (u, t) in the cone W.
    pub fn in_w(&self, u: &[f64], t: f64) -> bool {
        t >= 0.0 && self.hyperplane_dist(u) + t < self.t_cap
    }
}
