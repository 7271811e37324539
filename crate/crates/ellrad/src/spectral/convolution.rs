//! Intertwining of data-side and field-side smoothing: convolving derived
//! data with a separable kernel equals (up to the model constant) the derived
//! data of the field convolved with the kernel's dual image.

use crate::error::{Error, Result};
use crate::model::EccentricityModel;
use crate::phantom::{Phantom, PhantomSet};
use crate::quad::composite_gl;
use crate::transform::derived_exact_at;

/// Separable Gaussian mollifier φ(u′, ω) = e^{−|u′|²/2a²}·e^{−|ω|²/2b²} on
/// hyperplane-offset × radially-extended scale variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    pub u_sigma: f64,
    pub t_sigma: f64,
}

impl SmoothingKernel {
    pub fn new(u_sigma: f64, t_sigma: f64) -> Result<Self> {
        if !(u_sigma > 0.0) || !(t_sigma > 0.0) {
            return Err(Error::InvalidModel("kernel widths must be > 0".into()));
        }
        Ok(Self { u_sigma, t_sigma })
    }

    pub fn eval(&self, u_off: f64, scale: f64) -> f64 {
        (-0.5 * (u_off / self.u_sigma).powi(2)).exp()
            * (-0.5 * (scale / self.t_sigma).powi(2)).exp()
    }

    /// The dual image ψ(z) = ∫ φ(u, ρ(z,u)) du.  Because ρ² is a sum of
    /// per-axis squares, the integral is a Gaussian convolution and ψ is an
    /// axis-aligned Gaussian: widths (√(a²+λ²b²), νb), peak √(2π)aλb/σ₁.
    pub fn dual_field(&self, model: &EccentricityModel) -> Result<Phantom> {
        if model.n != 2 {
            return Err(Error::Unsupported(
                "smoothing intertwining is implemented in the plane".into(),
            ));
        }
        let (a, b) = (self.u_sigma, self.t_sigma);
        let s1 = (a * a + (model.lambda * b).powi(2)).sqrt();
        let amp = (2.0 * std::f64::consts::PI).sqrt() * a * model.lambda * b / s1;
        Phantom::gaussian(amp, vec![0.0, 0.0], vec![s1, model.nu * b])
    }
}

fn gaussian_parts(p: &Phantom) -> Result<(f64, &[f64], &[f64])> {
    match p {
        Phantom::Gaussian { amp, center, sigma } => Ok((*amp, center, sigma)),
        _ => Err(Error::Unsupported(
            "closed-form smoothing needs Gaussian phantoms".into(),
        )),
    }
}

/// The field-side smoothing f * ψ, member by member in closed form
/// (Gaussian variances add; amplitudes pick up the overlap factor).
pub fn smoothed_set(
    model: &EccentricityModel,
    set: &PhantomSet,
    kernel: &SmoothingKernel,
) -> Result<PhantomSet> {
    let psi = kernel.dual_field(model)?;
    let (psi_amp, _, psi_sigma) = gaussian_parts(&psi)?;
    let mut out = Vec::with_capacity(set.0.len());
    for member in &set.0 {
        let (amp, center, sigma) = gaussian_parts(member)?;
        let mut h_amp = amp * psi_amp;
        let mut h_sigma = Vec::with_capacity(sigma.len());
        for (s, q) in sigma.iter().zip(psi_sigma) {
            let merged = (s * s + q * q).sqrt();
            h_amp *= (2.0 * std::f64::consts::PI).sqrt() * s * q / merged;
            h_sigma.push(merged);
        }
        out.push(Phantom::gaussian(h_amp, center.to_vec(), h_sigma)?);
    }
    Ok(PhantomSet(out))
}

/// Quadrature resolution for the data-side convolution and the reference
/// derived data; `refined` doubles the effort for the convergence check.
#[derive(Debug, Clone, Copy)]
pub struct ConvolutionLevel {
    pub u_panels: usize,
    pub radial_panels: usize,
    pub angular_nodes: usize,
    pub surface_order: usize,
    pub reference_order: usize,
}

impl ConvolutionLevel {
    pub fn base() -> Self {
        Self {
            u_panels: 3,
            radial_panels: 2,
            angular_nodes: 32,
            surface_order: 64,
            reference_order: 256,
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            u_panels: self.u_panels * 2,
            radial_panels: self.radial_panels * 2,
            angular_nodes: self.angular_nodes * 2,
            surface_order: self.surface_order * 2,
            reference_order: self.reference_order,
        }
    }
}

/// Per-sample gap between the data-side convolution
/// ∬ g(u−u′, |ω−ω′|)·φ(u′, |ω′|) du′ dω′  (ω′ ranging over the plane, the
/// scale axis extended radially) and the derived data of the smoothed field
/// divided by C(λ), relative to the largest reference magnitude in the batch.
///
/// The chain of transform identities suggests an extra factor (2π)^{n/2} in
/// that constant; direct evaluation at any resolution refutes it, so the
/// calibrated constant 1/C(λ) is used here and verified by this residual.
pub fn convolution_residual(
    model: &EccentricityModel,
    set: &PhantomSet,
    kernel: &SmoothingKernel,
    samples: &[(f64, f64)],
    level: &ConvolutionLevel,
) -> Result<Vec<f64>> {
    if model.n != 2 {
        return Err(Error::Unsupported(
            "smoothing intertwining is implemented in the plane".into(),
        ));
    }
    if samples.iter().any(|&(_, t)| !(t > 0.0)) {
        return Err(Error::InvalidModel("sample scales must be > 0".into()));
    }
    let h_set = smoothed_set(model, set, kernel)?;
    let (a, b) = (kernel.u_sigma, kernel.t_sigma);
    let (un, uw) = composite_gl(-8.0 * a, 8.0 * a, level.u_panels, 12);
    let (rn, rw) = composite_gl(0.0, 8.0 * b, level.radial_panels, 12);
    let m = level.angular_nodes;
    let dth = 2.0 * std::f64::consts::PI / m as f64;
    let cos_th: Vec<f64> = (0..m).map(|j| ((j as f64 + 0.5) * dth).cos()).collect();

    let mut lhs = Vec::with_capacity(samples.len());
    let mut rhs = Vec::with_capacity(samples.len());
    for &(u, t) in samples {
        let mut acc = 0.0;
        for (up, wu) in un.iter().zip(&uw) {
            let au = wu * (-0.5 * (up / a).powi(2)).exp();
            let gu = [u - up];
            for (r, wr) in rn.iter().zip(&rw) {
                let br = au * wr * r * (-0.5 * (r / b).powi(2)).exp() * dth;
                for c in &cos_th {
                    let s = (t * t + r * r - 2.0 * t * r * c).max(0.0).sqrt();
                    acc += br * derived_exact_at(model, set, &gu, s, level.surface_order)?;
                }
            }
        }
        lhs.push(acc);
        rhs.push(
            derived_exact_at(model, &h_set, &[u], t, level.reference_order)? / model.c_lambda,
        );
    }
    let scale = rhs.iter().fold(0.0f64, |p, v| p.max(v.abs())).max(f64::MIN_POSITIVE);
    Ok(lhs.iter().zip(&rhs).map(|(l, r)| (l - r).abs() / scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gl_on;

    fn model() -> EccentricityModel {
        EccentricityModel::new(std::f64::consts::SQRT_2, 2).unwrap()
    }

    #[test]
    fn dual_field_matches_direct_quadrature() {
        let m = model();
        let k = SmoothingKernel::new(0.4, 0.3).unwrap();
        let psi = k.dual_field(&m).unwrap();
        let (nodes, wts) = gl_on(-8.0 * k.u_sigma - 4.0, 8.0 * k.u_sigma + 4.0, 96);
        for z in [[0.0, 0.0], [0.3, 0.5], [-1.0, 0.2]] {
            let mut direct = 0.0;
            for (u, w) in nodes.iter().zip(&wts) {
                direct += w * k.eval(*u, m.scaled_dist(&[z[0], z[1]], &[*u]));
            }
            let closed = psi.eval(&z);
            assert!(
                (direct - closed).abs() <= 1e-10 * closed.abs().max(1e-3),
                "z={z:?}: direct {direct:.12e} vs closed {closed:.12e}"
            );
        }
    }

    #[test]
    fn smoothed_set_matches_direct_convolution() {
        let m = model();
        let k = SmoothingKernel::new(0.4, 0.3).unwrap();
        let f = PhantomSet(vec![
            Phantom::gaussian(1.0, vec![0.2, 0.0], vec![0.6, 0.5]).unwrap(),
        ]);
        let h = smoothed_set(&m, &f, &k).unwrap();
        let psi = k.dual_field(&m).unwrap();
        let (n1, w1) = gl_on(-8.0, 8.0, 160);
        for x in [[0.2, 0.0], [0.8, 0.6]] {
            let mut direct = 0.0;
            for (y1, a1) in n1.iter().zip(&w1) {
                for (y2, a2) in n1.iter().zip(&w1) {
                    direct += a1 * a2 * f.0[0].eval(&[*y1, *y2]) * psi.eval(&[x[0] - y1, x[1] - y2]);
                }
            }
            let closed = h.0[0].eval(&x);
            assert!(
                (direct - closed).abs() <= 1e-8 * closed.abs().max(1e-6),
                "x={x:?}: direct {direct:.10e} vs closed {closed:.10e}"
            );
        }
    }

    #[test]
    fn residual_is_small_and_shrinks_under_refinement() {
        let m = model();
        let k = SmoothingKernel::new(0.35, 0.25).unwrap();
        let f = PhantomSet(vec![
            Phantom::gaussian(1.0, vec![0.0, 0.0], vec![0.7, 0.6]).unwrap(),
        ]);
        let samples = [(0.0, 0.9), (0.5, 1.3)];
        let base = ConvolutionLevel::base();
        let coarse = convolution_residual(&m, &f, &k, &samples, &base).unwrap();
        let fine = convolution_residual(&m, &f, &k, &samples, &base.refined()).unwrap();
        let worst_c = coarse.iter().cloned().fold(0.0, f64::max);
        let worst_f = fine.iter().cloned().fold(0.0, f64::max);
        assert!(worst_c <= 2e-2, "coarse gap {worst_c:.3e}");
        assert!(worst_f < worst_c, "no refinement: {worst_f:.3e} vs {worst_c:.3e}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = model();
        assert!(SmoothingKernel::new(0.0, 1.0).is_err());
        let k = SmoothingKernel::new(0.3, 0.3).unwrap();
        let m3 = EccentricityModel::new(2.0, 3).unwrap();
        assert!(k.dual_field(&m3).is_err());
        let ball = PhantomSet(vec![Phantom::ball_bump(1.0, vec![0.0, 0.0], 1.0).unwrap()]);
        assert!(smoothed_set(&m, &ball, &k).is_err());
        let f = PhantomSet(vec![Phantom::gaussian(1.0, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()]);
        assert!(
            convolution_residual(&m, &f, &k, &[(0.0, 0.0)], &ConvolutionLevel::base()).is_err()
        );
    }
}
