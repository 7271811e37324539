//! Radial Fourier (Hankel) transforms,
//! `H_n f(ρ) = ρ^{1−n/2} ∫₀^∞ t^{n/2} J_{(n−2)/2}(tρ) f(t) dt`,
//! the transform that carries a radial profile to its n-dimensional Fourier
//! transform up to the `(2π)^{n/2}` convention factor.

use crate::error::{Error, Result};
use crate::quad::composite_gl;
use crate::spectral::bessel::j0;

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Sampled `H_n f` on a ρ-grid.
#[derive(Debug, Clone)]
pub struct HankelProfile {
    pub n: usize,
    pub rho: Vec<f64>,
    pub values: Vec<f64>,
}

/// The full integrand weight `ρ^{1−n/2} t^{n/2} J_{(n−2)/2}(tρ)` of the
/// transform, with the half-integer Bessel order reduced to its closed form
/// for n = 3 (including the removable ρ → 0 limit).
pub fn radial_kernel(n: usize, t: f64, rho: f64) -> Result<f64> {
    match n {
        2 => Ok(t * j0(t * rho)),
        3 => {
            if rho.abs() < 1e-12 {
                Ok(SQRT_2_OVER_PI * t * t)
            } else {
                Ok(SQRT_2_OVER_PI * t * (t * rho).sin() / rho)
            }
        }
        _ => Err(Error::Unsupported(format!("Hankel transform implemented for n ∈ {{2,3}}, got {n}"))),
    }
}

/// Transform a functional profile, truncated at `t_max`, by composite
/// Gauss–Legendre quadrature with roughly `nodes` points (default 512).
pub fn hankel<F: Fn(f64) -> f64>(
    profile: F,
    n: usize,
    t_max: f64,
    rho_grid: &[f64],
    nodes: usize,
) -> Result<HankelProfile> {
    if t_max <= 0.0 || nodes == 0 {
        return Err(Error::InvalidGrid("Hankel quadrature needs t_max > 0 and nodes > 0".into()));
    }
    radial_kernel(n, 1.0, 1.0)?;
    let q = 32.min(nodes);
    let panels = nodes.div_ceil(q);
    let (ts, ws) = composite_gl(0.0, t_max, panels, q);
    let samples: Vec<f64> = ts.iter().map(|&t| profile(t)).collect();
    let mut values = Vec::with_capacity(rho_grid.len());
    for &rho in rho_grid {
        let mut acc = 0.0;
        for ((&t, &w), &ft) in ts.iter().zip(&ws).zip(&samples) {
            acc += w * radial_kernel(n, t, rho)? * ft;
        }
        values.push(acc);
    }
    Ok(HankelProfile { n, rho: rho_grid.to_vec(), values })
}

/// Transform a profile sampled on the uniform grid `t_k = (k+1)·dt` by the
/// trapezoid rule (the sampling layout of sinogram t-columns; the implicit
/// `t = 0` node carries a zero integrand).
pub fn hankel_sampled(dt: f64, samples: &[f64], n: usize, rho: f64) -> Result<f64> {
    if dt <= 0.0 || samples.is_empty() {
        return Err(Error::InvalidGrid("sampled Hankel transform needs dt > 0 and data".into()));
    }
    let last = samples.len() - 1;
    let mut acc = 0.0;
    for (k, &v) in samples.iter().enumerate() {
        let t = (k + 1) as f64 * dt;
        let w = if k == last { 0.5 * dt } else { dt };
        acc += w * radial_kernel(n, t, rho)? * v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::phantom::Phantom;
    use crate::spectral::fft::fourier_nd;

    #[test]
    fn gaussian_is_self_reciprocal_n2() {
        let rho: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let h = hankel(|t| (-0.5 * t * t).exp(), 2, 12.0, &rho, 512).unwrap();
        for (r, v) in rho.iter().zip(&h.values) {
            let expected = (-0.5 * r * r).exp();
            assert!((v - expected).abs() <= 1e-8, "rho={r}: {v} vs {expected}");
        }
    }

    #[test]
    fn gaussian_is_self_reciprocal_n3() {
        let rho: Vec<f64> = (1..40).map(|k| 0.1 * k as f64).collect();
        let h = hankel(|t| (-0.5 * t * t).exp(), 3, 12.0, &rho, 512).unwrap();
        for (r, v) in rho.iter().zip(&h.values) {
            let expected = (-0.5 * r * r).exp();
            assert!((v - expected).abs() <= 1e-8, "rho={r}: {v} vs {expected}");
        }
    }

    #[test]
    fn zero_profile_transforms_to_zero() {
        let h = hankel(|_| 0.0, 2, 5.0, &[0.5, 1.0], 128).unwrap();
        assert!(h.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_radial_spatial_fourier_transform_n3() {
        // H₃ of a radial profile equals the 3-D Fourier transform of the
        // corresponding radial field divided by (2π)^{3/2}.
        let grid = Grid::centered(vec![48, 48, 48], vec![0.35, 0.35, 0.35]).unwrap();
        let ph = Phantom::gaussian(1.0, vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0]).unwrap();
        let f = crate::phantom::sample_phantom(&ph, grid);
        let s = fourier_nd(&f);
        let norm = (2.0 * std::f64::consts::PI).powf(1.5);
        for idx in [[1usize, 0, 0], [2, 1, 0], [3, 2, 1], [0, 0, 4]] {
            let xi: Vec<f64> = (0..3).map(|a| s.freq(a, idx[a])).collect();
            let rho = (xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
            let via_hankel = hankel(|t| (-0.5 * t * t).exp(), 3, 12.0, &[rho], 512).unwrap().values[0];
            let via_fft = s.at(&idx).re / norm;
            assert!(
                (via_hankel - via_fft).abs() <= 1e-6,
                "rho={rho}: {via_hankel} vs {via_fft}"
            );
        }
    }

    #[test]
    fn sampled_variant_agrees_with_quadrature() {
        let dt = 0.01;
        let samples: Vec<f64> = (0..1200)
            .map(|k| {
                let t = (k + 1) as f64 * dt;
                (-0.5 * t * t).exp()
            })
            .collect();
        for rho in [0.5, 1.3, 2.2] {
            let v = hankel_sampled(dt, &samples, 2, rho).unwrap();
            let expected = (-0.5 * rho * rho).exp();
            assert!((v - expected).abs() <= 1e-5, "rho={rho}: {v} vs {expected}");
        }
    }

    #[test]
    fn transform_is_boundedness_consistent() {
        // |H₂f(ρ)| ≤ ∫ t |f| dt since |J₀| ≤ 1.
        let rho: Vec<f64> = (0..25).map(|k| 0.2 * k as f64).collect();
        let h = hankel(|t| (-0.5 * t * t).exp(), 2, 12.0, &rho, 512).unwrap();
        let bound: f64 = 1.0; // ∫₀^∞ t e^{−t²/2} dt
        assert!(h.values.iter().all(|v| v.abs() <= bound + 1e-9));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(hankel(|_| 1.0, 4, 5.0, &[1.0], 64).is_err());
        assert!(hankel(|_| 1.0, 2, -1.0, &[1.0], 64).is_err());
        assert!(hankel_sampled(0.0, &[1.0], 2, 1.0).is_err());
    }
}
