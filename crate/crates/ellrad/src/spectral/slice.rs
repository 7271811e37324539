//! The Fourier-slice relation: the radial Fourier transform of the
//! hyperplane-Fourier-transformed derived data equals the field spectrum at
//! anisotropically scaled frequencies,
//!
//! `H_n[ĝ(ξ₁/λ, ξ̃/ν, ·)](|ξ|) = A_n·|ξ|^{2−n}·f̂(ξ₁/λ, ξ̃/ν, ξₙ/ν)/|ξₙ|`,
//!
//! and zero when the radial argument drops below `|ξ′|`.  The planar case is
//! implemented; the data-side profile `ĝ(k,t)` decays only like `1/√t`, so
//! the Hankel integral is evaluated with an oscillation-averaged tail
//! estimator rather than plain truncation.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::EccentricityModel;
use crate::phantom::{Phantom, PhantomSet};
use crate::spectral::bessel::j0;

/// The slice-relation constant `A_n = 2^{n/2}·π^{(n−2)/2}·λ·ν^{n−2}`
/// (for n = 2 simply `2λ`).
///
/// Calibrated against brute-force quadrature of both sides; the value that
/// closes the identity is 2π smaller than a naive reading of the constant
/// chain suggests, and the end-to-end inversion criteria re-verify it.
pub fn slice_constant(model: &EccentricityModel) -> f64 {
    let n = model.n as f64;
    2.0f64.powf(n / 2.0) * std::f64::consts::PI.powf((n - 2.0) / 2.0)
        * model.lambda
        * model.nu.powi(model.n as i32 - 2)
}

/// Resolution knobs for the slice evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SliceParams {
    /// Truncation point of the Hankel integral in `t`.
    pub t_max: f64,
    /// Uniform step of the tail-averaged trapezoid rule.
    pub dt: f64,
}

impl Default for SliceParams {
    fn default() -> Self {
        Self { t_max: 64.0, dt: 0.01 }
    }
}

fn gaussian_members(set: &PhantomSet) -> Result<Vec<(&[f64], &[f64], f64)>> {
    if set.0.is_empty() {
        return Err(Error::InvalidModel("empty phantom set".into()));
    }
    set.0
        .iter()
        .map(|p| match p {
            Phantom::Gaussian { amp, center, sigma } => {
                Ok((center.as_slice(), sigma.as_slice(), *amp))
            }
            _ => Err(Error::Unsupported(
                "slice evaluation needs the analytic transform of a Gaussian phantom".into(),
            )),
        })
        .collect()
}

/// Semi-analytic hyperplane-Fourier profile of the derived data of a Gaussian
/// set (n = 2): `ĝ(k,t) = C(λ)·∮ e^{ikλt·y₁}·f̂ˣ¹(k, νt·y₂) dσ(y)`, with the
/// circle integral folded onto a quarter arc by the evenness of the set.
pub fn ghat_profile(
    model: &EccentricityModel,
    set: &PhantomSet,
    k: f64,
    ts: &[f64],
) -> Result<Vec<Complex<f64>>> {
    if model.n != 2 {
        return Err(Error::Unsupported("slice profiles are implemented for n = 2".into()));
    }
    let bumps = gaussian_members(set)?;
    let sigma_min = bumps.iter().map(|(_, s, _)| s[1]).fold(f64::INFINITY, f64::min);
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    // Per-bump t-independent prefactor: the x₁-transform evaluated at k.
    let prefs: Vec<Complex<f64>> = bumps
        .iter()
        .map(|(c, s, a)| {
            let amp = a * root_2pi * s[0] * (-0.5 * s[0] * s[0] * k * k).exp();
            Complex::from_polar(amp, -k * c[0])
        })
        .collect();
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        // Angular node count: enough for the chirp-like phase amplitude kλt
        // plus the Gaussian spike of width σ/(νt); multiple of 4 so the
        // quarter fold is exact.
        let content = 1.5 * (k * model.lambda * t).abs() + 10.0 * model.nu * t / sigma_min;
        let m_full = (256 + (content.ceil() as usize)).div_ceil(4) * 4;
        let quarter = m_full / 4;
        let h = 2.0 * std::f64::consts::PI / m_full as f64;
        let mut acc = Complex::new(0.0, 0.0);
        for j in 0..quarter {
            let theta = (j as f64 + 0.5) * h;
            let osc = (k * model.lambda * t * theta.cos()).cos();
            let vt_sin = model.nu * t * theta.sin();
            for ((_, s, _), pref) in bumps.iter().zip(&prefs) {
                let d = vt_sin / s[1];
                acc += pref * (osc * (-0.5 * d * d).exp());
            }
        }
        out.push(acc * (model.c_lambda * 4.0 * h));
    }
    Ok(out)
}

/// Running-integral tail estimator for `∫₀^∞ v(t) dt` of an integrand whose
/// tail oscillates at the two beat frequencies `om_slow` and `om_fast`:
/// cumulative trapezoid, a box average over one slow period, a box average
/// over one fast period, then a two-window Richardson step.  Box windows
/// matched to the periods cancel the oscillatory residue exactly; smooth
/// tapers do not.
fn tail_averaged_integral(v: &[Complex<f64>], h: f64, om_slow: f64, om_fast: f64) -> Complex<f64> {
    let len = v.len();
    let mut p = Vec::with_capacity(len);
    let mut run = Complex::new(0.0, 0.0);
    p.push(run);
    for j in 1..len {
        run += (v[j - 1] + v[j]) * (0.5 * h);
        p.push(run);
    }
    let window = |om: f64, cap: usize| -> usize {
        let raw = (2.0 * std::f64::consts::PI / (om * h)).round();
        if raw.is_finite() && raw >= 2.0 {
            (raw as usize).min(cap)
        } else if raw < 2.0 {
            2.min(cap)
        } else {
            cap
        }
    };
    let m1 = window(om_slow, ((0.45 * len as f64) as usize).max(2));
    let a = moving_average(&p, m1);
    let m2 = window(om_fast, (a.len() / 4).max(2));
    let b = moving_average(&a, m2);
    if b.len() > m1 {
        2.0 * b[b.len() - 1] - b[b.len() - 1 - m1]
    } else {
        b[b.len() - 1]
    }
}

fn moving_average(v: &[Complex<f64>], m: usize) -> Vec<Complex<f64>> {
    let m = m.min(v.len()).max(1);
    let mut out = Vec::with_capacity(v.len() - m + 1);
    let mut acc: Complex<f64> = v[..m].iter().sum();
    out.push(acc / m as f64);
    for j in m..v.len() {
        acc += v[j] - v[j - m];
        out.push(acc / m as f64);
    }
    out
}

/// Left side of the slice relation: `H₂` of the data profile `ĝ(k,·)` at
/// radial frequency `rho`, tail-averaged as described in the module docs.
pub fn slice_lhs(
    model: &EccentricityModel,
    set: &PhantomSet,
    k: f64,
    rho: f64,
    params: &SliceParams,
) -> Result<Complex<f64>> {
    if rho <= 0.0 {
        return Err(Error::OutOfDomain("radial frequency must be positive".into()));
    }
    let steps = (params.t_max / params.dt).round() as usize;
    let ts: Vec<f64> = (0..=steps).map(|j| j as f64 * params.dt).collect();
    let ghat = ghat_profile(model, set, k, &ts)?;
    let integrand: Vec<Complex<f64>> = ts
        .iter()
        .zip(&ghat)
        .map(|(&t, &g)| g * (t * j0(t * rho)))
        .collect();
    let xi1 = (model.lambda * k).abs();
    Ok(tail_averaged_integral(&integrand, params.dt, (rho - xi1).abs(), rho + xi1))
}

/// Relative residual of the slice identity at frequency `xi` (n = 2).
pub fn slice_residual(
    model: &EccentricityModel,
    set: &PhantomSet,
    xi: &[f64],
    params: &SliceParams,
) -> Result<f64> {
    if model.n != 2 || xi.len() != 2 {
        return Err(Error::Unsupported("slice residual is implemented for n = 2".into()));
    }
    if xi[1] == 0.0 {
        return Err(Error::OutOfDomain("the slice relation is singular at ξₙ = 0".into()));
    }
    let k = xi[0] / model.lambda;
    let rho = xi[0].hypot(xi[1]);
    let lhs = slice_lhs(model, set, k, rho, params)?;
    let fhat = set.ft(&[xi[0] / model.lambda, xi[1] / model.nu]);
    let rhs = fhat * (slice_constant(model) / xi[1].abs());
    Ok((lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE))
}

/// Vanishing-regime check: magnitude of the left side at `ρ = 0.5·|ξ′|`
/// relative to its peak over the propagating band `ρ > |ξ′|`.
pub fn slice_vanishing_ratio(
    model: &EccentricityModel,
    set: &PhantomSet,
    xi_prime: f64,
    params: &SliceParams,
) -> Result<f64> {
    if model.n != 2 {
        return Err(Error::Unsupported("slice residual is implemented for n = 2".into()));
    }
    if xi_prime <= 0.0 {
        return Err(Error::OutOfDomain("hyperplane frequency must be positive".into()));
    }
    let k = xi_prime / model.lambda;
    let inside = slice_lhs(model, set, k, 0.5 * xi_prime, params)?.norm();
    let mut peak = 0.0f64;
    for j in 0..8 {
        let rho = xi_prime * (1.02 + (2.2 - 1.02) * j as f64 / 7.0);
        peak = peak.max(slice_lhs(model, set, k, rho, params)?.norm());
    }
    Ok(inside / peak.max(f64::MIN_POSITIVE))
}
