//! Continuous-convention Fourier transforms on centered grids.
//!
//! `fourier_nd` approximates `f̂(ξ) = ∫ f(x) e^{−ix·ξ} dx` by scaling the DFT
//! of the sampled field with the cell volume and the origin phase; the inverse
//! applies the `(2π)^{−n}` convention.  Frequencies are the usual DFT bins
//! `ξ_k = 2π·k/(N·Δ)` with `k` interpreted symmetrically about zero.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::grid::{Grid, ScalarField};

/// Sampled Fourier data `f̂(ξ)` on the frequency grid dual to a spatial grid.
///
/// The spatial grid is retained verbatim; per-axis frequencies are implied by
/// its dimensions and spacings.  Values are stored in the same row-major
/// layout as the spatial field, index `k` on each axis meaning the DFT bin
/// with signed index `k` (or `k − N` past the midpoint).
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: Grid,
    pub values: Vec<Complex<f64>>,
}

impl SpectralField {
    /// Angular frequency of bin `k` on `axis`.
    pub fn freq(&self, axis: usize, k: usize) -> f64 {
        let m = self.grid.dims[axis];
        debug_assert!(k < m);
        let signed = if k <= m / 2 { k as i64 } else { k as i64 - m as i64 };
        2.0 * std::f64::consts::PI * signed as f64 / (m as f64 * self.grid.spacing[axis])
    }

    /// All bin frequencies along `axis`, in storage order.
    pub fn freqs(&self, axis: usize) -> Vec<f64> {
        (0..self.grid.dims[axis]).map(|k| self.freq(axis, k)).collect()
    }

    /// Frequency-bin spacing `Δξ = 2π/(NΔ)` along `axis`.
    pub fn freq_step(&self, axis: usize) -> f64 {
        2.0 * std::f64::consts::PI / (self.grid.dims[axis] as f64 * self.grid.spacing[axis])
    }

    /// Value at a multi-index.
    pub fn at(&self, idx: &[usize]) -> Complex<f64> {
        self.values[self.grid.flat(idx)]
    }

    /// The frequency vector of a flat storage index.
    pub fn freq_point(&self, flat: usize) -> Vec<f64> {
        let idx = self.grid.unflat(flat);
        idx.iter().enumerate().map(|(a, &k)| self.freq(a, k)).collect()
    }
}

/// In-place unnormalized FFT along every axis of a row-major array.
fn fft_all_axes(values: &mut [Complex<f64>], dims: &[usize], inverse: bool) {
    let mut planner = FftPlanner::new();
    let total = values.len();
    for axis in 0..dims.len() {
        let m = dims[axis];
        if m == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let stride: usize = dims[axis + 1..].iter().product();
        let block = stride * m;
        let mut line = vec![Complex::default(); m];
        for chunk in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = chunk + inner;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = values[base + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    values[base + j * stride] = *v;
                }
            }
        }
    }
}

/// Multiply in the per-axis scale-and-phase factors after (or before) the FFT
/// passes.  `factors[a][k]` is applied to every element whose index on axis
/// `a` is `k`.
fn apply_axis_factors(values: &mut [Complex<f64>], dims: &[usize], factors: &[Vec<Complex<f64>>]) {
    for (axis, fac) in factors.iter().enumerate() {
        let m = dims[axis];
        let stride: usize = dims[axis + 1..].iter().product();
        for (i, v) in values.iter_mut().enumerate() {
            let k = (i / stride) % m;
            *v *= fac[k];
        }
    }
}

/// Continuous-convention forward transform of a real field.
pub fn fourier_nd(f: &ScalarField) -> SpectralField {
    let grid = f.grid.clone();
    let mut values: Vec<Complex<f64>> =
        f.values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_all_axes(&mut values, &grid.dims, false);
    let out = SpectralField { grid, values };
    let factors: Vec<Vec<Complex<f64>>> = (0..out.grid.rank())
        .map(|a| {
            let h = out.grid.spacing[a];
            let x0 = out.grid.origin[a];
            (0..out.grid.dims[a])
                .map(|k| Complex::from_polar(h, -x0 * out.freq(a, k)))
                .collect()
        })
        .collect();
    let mut out = out;
    apply_axis_factors(&mut out.values, &out.grid.dims.clone(), &factors);
    out
}

/// Inverse of [`fourier_nd`]; returns the real part of the reconstructed
/// samples (the imaginary residue of a genuine spectrum is rounding noise).
pub fn inverse_fourier_nd(s: &SpectralField) -> ScalarField {
    let mut values = s.values.clone();
    let factors: Vec<Vec<Complex<f64>>> = (0..s.grid.rank())
        .map(|a| {
            let h = s.grid.spacing[a];
            let m = s.grid.dims[a] as f64;
            let x0 = s.grid.origin[a];
            (0..s.grid.dims[a])
                .map(|k| Complex::from_polar(1.0 / (m * h), x0 * s.freq(a, k)))
                .collect()
        })
        .collect();
    apply_axis_factors(&mut values, &s.grid.dims, &factors);
    fft_all_axes(&mut values, &s.grid.dims, true);
    ScalarField::from_values(s.grid.clone(), values.iter().map(|v| v.re).collect())
        .expect("value count matches grid by construction")
}
