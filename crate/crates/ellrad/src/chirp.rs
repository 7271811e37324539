//! Quadratic-phase analysis of derived data: integrating the boundary data
//! against e^{iwt²} turns each ellipsoid family into a pure phase object,
//! giving a second, Fourier-free route from data to field.
//!
//! The chain: `compute_g` maps derived data to its chirp transform
//! G(u, w) = ∫₀^∞ ∂ₜR f · e^{iwt²} dt; a quadratic-phase factor converts G
//! into the (α, γ)-spectrum K of the folded profile k; `invert_chirp` sums
//! the double oscillatory integral that rebuilds the field from G directly.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::model::EccentricityModel;
use crate::phantom::Scene;
use crate::transform::{DataKind, Sinogram};
use rustfft::num_complex::Complex;

/// Chirp transform samples G(u, w) on a hyperplane grid × w list.
#[derive(Debug, Clone, PartialEq)]
pub struct ChirpData {
    pub model: EccentricityModel,
    pub ugrid: Grid,
    pub ws: Vec<f64>,
    /// u-major, w fastest: `values[iu * ws.len() + iw]`.
    pub values: Vec<Complex<f64>>,
    /// Upper end of the t-range the data was integrated over.
    pub t_max: f64,
    /// Spectral reach of the data cut off at t_max: the largest u-frequency
    /// still present in the terminal t-row.  Everything the data misses
    /// beyond t_max enters the inversion only through w-rows slower than
    /// this, so it marks where those rows stop being trustworthy; zero when
    /// the data decayed before t_max.
    pub ridge_cut: f64,
}

impl ChirpData {
    pub fn at(&self, iu: usize, iw: usize) -> Complex<f64> {
        self.values[iu * self.ws.len() + iw]
    }

    /// Largest deviation from the reality constraint G(u,−w) = conj G(u,w),
    /// over every (u, w) pair whose negated w is also on the grid.
    pub fn hermitian_gap(&self) -> f64 {
        let mut worst = 0.0f64;
        for (iw, w) in self.ws.iter().enumerate() {
            let Some(jm) = self.ws.iter().position(|v| (v + w).abs() < 1e-12) else {
                continue;
            };
            for iu in 0..self.ugrid.len() {
                worst = worst.max((self.at(iu, jm) - self.at(iu, iw).conj()).norm());
            }
        }
        worst
    }

    /// Tensor Catmull-Rom interpolation; errors out when (u, w) leaves the
    /// grid.  Cubic order keeps the interpolation error well below the
    /// quadrature accuracy of the samples themselves.
    fn interp(&self, u: &[f64], w: f64) -> Result<Complex<f64>> {
        if u.len() != self.ugrid.rank() {
            return Err(Error::OutOfDomain("chirp probe has wrong rank".into()));
        }
        if self.ugrid.rank() != 1 {
            return Err(Error::Unsupported(
                "chirp interpolation is implemented in the plane".into(),
            ));
        }
        let us = self.ugrid.axis_coords(0);
        let (i0, fu) = axis_locate(&us, u[0])
            .ok_or_else(|| Error::OutOfDomain(format!("u = {} outside the chirp grid", u[0])))?;
        let (j0, fw) = axis_locate(&self.ws, w)
            .ok_or_else(|| Error::OutOfDomain(format!("w = {w} outside the chirp grid")))?;
        let nw = self.ws.len();
        let nu = us.len();
        let v = |i: usize, j: usize| self.values[i.min(nu - 1) * nw + j.min(nw - 1)];
        let wcol = |i: usize| {
            cr4(
                v(i, j0.saturating_sub(1)),
                v(i, j0),
                v(i, j0 + 1),
                v(i, j0 + 2),
                fw,
            )
        };
        Ok(cr4(
            wcol(i0.saturating_sub(1)),
            wcol(i0),
            wcol(i0 + 1),
            wcol(i0 + 2),
            fu,
        ))
    }
}

/// Catmull-Rom kernel on four consecutive uniform samples, fraction f from
/// the second.
fn cr4(
    vm: Complex<f64>,
    v0: Complex<f64>,
    v1: Complex<f64>,
    vp: Complex<f64>,
    f: f64,
) -> Complex<f64> {
    let a = (v0 - v1) * 1.5 + (vp - vm) * 0.5;
    let b = vm - v0 * 2.5 + v1 * 2.0 - vp * 0.5;
    let c = (v1 - vm) * 0.5;
    ((a * f + b) * f + c) * f + v0
}

/// Bracket x in a sorted coordinate list: (left index, fraction), or None
/// outside.  A list of length 1 matches only its single value.
fn axis_locate(xs: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = xs.len();
    if n == 1 {
        return ((x - xs[0]).abs() < 1e-12).then_some((0, 0.0));
    }
    if x < xs[0] - 1e-12 || x > xs[n - 1] + 1e-12 {
        return None;
    }
    let mut i = xs.partition_point(|&v| v <= x);
    i = i.clamp(1, n - 1);
    let f = ((x - xs[i - 1]) / (xs[i] - xs[i - 1])).clamp(0.0, 1.0);
    Some((i - 1, f))
}

/// Moments m_k = ∫₀^h σ^k e^{iwσ} dσ for k = 0, 1, 2, switching to a power
/// series when |wh| is small enough for the closed forms to cancel.
fn span_moments(h: f64, w: f64) -> [Complex<f64>; 3] {
    let z = w * h;
    if z.abs() < 0.5 {
        let iz = Complex::new(0.0, z);
        let mut term = Complex::new(1.0, 0.0);
        let mut s = [Complex::new(0.0, 0.0); 3];
        for j in 0..18u32 {
            for (k, acc) in s.iter_mut().enumerate() {
                *acc += term / (j as f64 + k as f64 + 1.0);
            }
            term *= iz / (j as f64 + 1.0);
        }
        [s[0] * h, s[1] * h * h, s[2] * h * h * h]
    } else {
        let iw = Complex::new(0.0, w);
        let eh = Complex::from_polar(1.0, z);
        let m0 = (eh - 1.0) / iw;
        let m1 = (eh * h - m0) / iw;
        let m2 = (eh * h * h - m1 * 2.0) / iw;
        [m0, m1, m2]
    }
}

/// Solve a 3×3 real system with a complex right-hand side by Gaussian
/// elimination with partial pivoting (the normal equations of a quadratic
/// least-squares fit; always well conditioned for ≥3 distinct nodes).
fn solve3(mat: &[[f64; 3]; 3], rhs: &[Complex<f64>; 3]) -> [Complex<f64>; 3] {
    let mut a = *mat;
    let mut b = *rhs;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= b[col] * f;
        }
    }
    let mut x = [Complex::new(0.0, 0.0); 3];
    for col in (0..3).rev() {
        let mut acc = b[col];
        for k in col + 1..3 {
            acc -= x[k] * a[col][k];
        }
        x[col] = acc / a[col][col];
    }
    x
}

/// Filon-type weights for ∫ F(s)·e^{iws} ds over the ascending nodes `s`,
/// with F fitted by a parabola on each consecutive node pair-of-cells (a
/// trailing single cell, if any, is handled linearly).  The oscillation is
/// integrated exactly, so the rule stays uniformly accurate in w and
/// reduces to a Simpson-like rule at w = 0.
fn filon_parabolic_weights(s: &[f64], w: f64) -> Vec<Complex<f64>> {
    let n = s.len();
    let mut c = vec![Complex::new(0.0, 0.0); n];
    let mut j = 0;
    while j + 2 < n {
        let (a, mid, b) = (s[j], s[j + 1], s[j + 2]);
        let (mu, h) = (mid - a, b - a);
        let [m0, m1, m2] = span_moments(h, w);
        let rot = Complex::from_polar(1.0, w * a);
        c[j] += rot * (m2 - m1 * (mu + h) + m0 * (mu * h)) / (mu * h);
        c[j + 1] += rot * (m2 - m1 * h) / (mu * (mu - h));
        c[j + 2] += rot * (m2 - m1 * mu) / (h * (h - mu));
        j += 2;
    }
    if j + 1 < n {
        let h = s[j + 1] - s[j];
        let [m0, m1, _] = span_moments(h, w);
        let rot = Complex::from_polar(1.0, w * s[j]);
        c[j] += rot * (m0 - m1 / h);
        c[j + 1] += rot * m1 / h;
    }
    c
}

/// Chirp transform of derived data: G(u, w) = ∫₀^{t_max} t^{n−1} g(u,t)
/// e^{iwt²} dt on every u node, for each listed w.
///
/// Substituting s = t² makes the phase linear, and since derived data is
/// even in t the amplitude ½ t^{n−2} g is smooth in s.  The Filon rule runs
/// directly on the image s_j = (j·dt)² of the t-grid — the amplitude values
/// are exact data samples, so no resampling error enters; the t = 0 node is
/// filled by the even-limit extrapolation.
pub fn compute_g(data: &Sinogram, ws: &[f64]) -> Result<ChirpData> {
    if data.kind != DataKind::Derived {
        return Err(Error::Unsupported("chirp transform expects derived data".into()));
    }
    if ws.is_empty() || ws.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidModel("w list must be nonempty and finite".into()));
    }
    if ws.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidModel("w list must be strictly increasing".into()));
    }
    let n = data.model.n;
    let sg = &data.grid;
    let (nt, dt) = (sg.nt, sg.dt);
    if nt < 4 {
        return Err(Error::InvalidGrid("chirp transform needs at least 4 t-nodes".into()));
    }
    let s_nodes: Vec<f64> = (0..=nt).map(|j| (j as f64 * dt).powi(2)).collect();

    let nu = sg.ugrid.len();
    let nw = ws.len();
    let mut amps = vec![0.0; nu * (nt + 1)];
    for iu in 0..nu {
        let row = &mut amps[iu * (nt + 1)..(iu + 1) * (nt + 1)];
        row[0] = if n == 2 {
            0.5 * (4.0 * data.at(iu, 0) - data.at(iu, 1)) / 3.0
        } else {
            0.0
        };
        for j in 1..=nt {
            let t = j as f64 * dt;
            let radial = if n == 2 { 1.0 } else { t.powi(n as i32 - 2) };
            row[j] = 0.5 * radial * data.at(iu, j - 1);
        }
    }
    let weights: Vec<Vec<Complex<f64>>> = ws
        .iter()
        .map(|&w| filon_parabolic_weights(&s_nodes, w))
        .collect();

    let mut values = vec![Complex::new(0.0, 0.0); nu * nw];
    crate::exec::fill_cells_complex(&mut values, |flat| {
        let (iu, iw) = (flat / nw, flat % nw);
        let f = &amps[iu * (nt + 1)..(iu + 1) * (nt + 1)];
        let c = &weights[iw];
        let mut acc = Complex::new(0.0, 0.0);
        for (a, b) in f.iter().zip(c) {
            acc += b * *a;
        }
        acc
    });

    // Bandwidth of the terminal t-row: the largest u-frequency ω at which
    // its windowed spectrum still holds more than 2% of the row's absolute
    // mass.  Data cut off while still active near t_max loses exactly the
    // slow rows below ~ω·λ/(2t_max), and the inversion uses this to decide
    // which of its w-rows to trust.
    let us = sg.ugrid.axis_coords(0);
    let terminal: Vec<f64> = (0..nu).map(|iu| amps[iu * (nt + 1) + nt]).collect();
    let denom: f64 = terminal.iter().map(|a| a.abs()).sum();
    let mut ridge_cut = 0.0;
    if denom > 0.0 {
        let omega_max = std::f64::consts::PI / sg.ugrid.spacing[0];
        let step = 0.04;
        let mut omega = 0.0;
        while omega <= omega_max {
            let mut acc = Complex::new(0.0, 0.0);
            for (a, &u) in terminal.iter().zip(&us) {
                acc += Complex::from_polar(*a, -omega * u);
            }
            if acc.norm() > 0.02 * denom {
                ridge_cut = omega + step;
            }
            omega += step;
        }
    }

    Ok(ChirpData {
        model: data.model,
        ugrid: sg.ugrid.clone(),
        ws: ws.to_vec(),
        values,
        t_max: sg.t_max(),
        ridge_cut,
    })
}

/// One sample of the (α, γ)-spectrum of the folded profile, recovered from
/// chirp data by the quadratic-phase relation
/// K(α, γ) = (1/2C)·e^{iα²/4γ}·G(−αλ/2γ, −γ).
///
/// The 1/2C normalization is calibrated against direct quadrature of the
/// folded profile; the constant suggested by the derivation chain is 1/C,
/// off by the factor two that the oracle refutes.
pub fn compute_k(
    gd: &ChirpData,
    alpha: f64,
    gamma: f64,
    gamma_min: f64,
) -> Result<Complex<f64>> {
    if gd.model.n != 2 {
        return Err(Error::Unsupported(
            "profile spectrum probes are implemented in the plane".into(),
        ));
    }
    if !(gamma_min > 0.0) {
        return Err(Error::InvalidModel("gamma_min must be > 0".into()));
    }
    if gamma.abs() < gamma_min {
        return Err(Error::OutOfDomain(format!(
            "|γ| = {} below the phase-scale floor {gamma_min}",
            gamma.abs()
        )));
    }
    let m = &gd.model;
    let u = -alpha * m.lambda / (2.0 * gamma);
    let g = gd.interp(&[u], -gamma)?;
    let phase = Complex::from_polar(1.0, alpha * alpha / (4.0 * gamma));
    Ok(phase * g / (2.0 * m.c_lambda))
}

/// The folded profile k(x′, r): the field read on the paraboloid
/// r = |x′|² + s², divided by the fold Jacobian 2s, with the model's axis
/// scaling applied — zero off the paraboloid's interior.
pub fn k_eval(model: &EccentricityModel, scene: &impl Scene, xprime: &[f64], r: f64) -> f64 {
    debug_assert_eq!(xprime.len(), model.n - 1);
    let q: f64 = xprime.iter().map(|v| v * v).sum();
    if !(r > q) || !(r > 0.0) {
        return 0.0;
    }
    let s = (r - q).sqrt();
    let mut x = Vec::with_capacity(model.n);
    x.push(model.lambda * xprime[0]);
    for v in &xprime[1..] {
        x.push(model.nu * v);
    }
    x.push(model.nu * s);
    scene.eval(&x) / (2.0 * s)
}

/// Controls for [`invert_chirp`]; `None` entries are derived from the data.
#[derive(Debug, Clone, Copy)]
pub struct ChirpInversion {
    /// Lower edge of the spectral box: rows with γ < gamma_min are dropped
    /// and the wedge below them is treated as truncated (default 0: keep
    /// every positive row and close the integral down to γ = 0).
    pub gamma_min: Option<f64>,
    /// Upper edge of the spectral box (default: the largest w on the grid).
    pub gamma_max: Option<f64>,
    /// Optional α-truncation: each γ row only reads data with
    /// |u| ≤ alpha_max·λ/2γ, band-limiting the output.  Default: no cap.
    /// A tight cap starves the tail completion — prefer leaving it unset.
    pub alpha_max: Option<f64>,
    /// Complete the γ-integral beyond gamma_max with the closed-form
    /// Fresnel tail of the fold singularity (default on).  Without it the
    /// truncated integral converges only like γ_max^{-1/4} in L².
    pub tail: bool,
    /// Re-evaluate on every-other γ row and Richardson-extrapolate.
    pub richardson: bool,
}

impl Default for ChirpInversion {
    fn default() -> Self {
        ChirpInversion {
            gamma_min: None,
            gamma_max: None,
            alpha_max: None,
            tail: true,
            richardson: false,
        }
    }
}

/// Fresnel integral ∫₀^x e^{iτ²} dτ for x ≥ 0: power series up to x = 3.5,
/// then the integration-by-parts asymptotic around the limit value
/// (√π/2)·e^{iπ/4}.
fn fresnel_e(x: f64) -> Complex<f64> {
    if x < 4.0 {
        // Termwise integral of Σ (iτ²)^m/m!: Σ i^m x^{2m+1}/(m!(2m+1)).
        let mut term = Complex::new(x, 0.0);
        let mut fact = 1.0;
        let mut acc = Complex::new(0.0, 0.0);
        for mm in 0..60 {
            let m = mm as f64;
            let piece = term / (fact * (2.0 * m + 1.0));
            acc += piece;
            if piece.norm() < 1e-18 * acc.norm().max(1e-3) {
                break;
            }
            term *= Complex::new(0.0, x * x);
            fact *= m + 1.0;
        }
        acc
    } else {
        let limit = Complex::from_polar(0.5 * std::f64::consts::PI.sqrt(), std::f64::consts::FRAC_PI_4);
        let mut coeff = Complex::new(1.0, 0.0);
        let mut acc = Complex::new(0.0, 0.0);
        let x2 = x * x;
        // Asymptotic series: sum until the terms stop shrinking (optimal
        // truncation), which happens near k ≈ x².
        for k in 0..24u32 {
            acc += coeff;
            let next = coeff * Complex::new(0.0, -(2.0 * k as f64 + 1.0) / 2.0) / x2;
            if next.norm() >= coeff.norm() {
                break;
            }
            coeff = next;
        }
        let remainder = Complex::from_polar(1.0, x2) * Complex::new(0.0, 1.0 / (2.0 * x)) * acc;
        limit - remainder
    }
}

/// One quadrature pass of the reconstruction: trapezoid over the listed γ
/// rows (spacing `dgamma`), each row an exact-node Fresnel sum over the
/// data's u-grid, plus (optionally) the closed-form completion of the
/// γ-tail beyond the last row.
///
/// The low rows need care: the u-support of G(·,γ) grows like 1/γ, so on a
/// finite u-grid the smallest rows integrate only a fraction of their mass.
/// Each row is therefore checked against its own edges, the contaminated
/// block is dropped, and in `wedge` mode the whole band [0, γ_lo] is closed
/// by extrapolating a quadratic fit of S from the first trustworthy rows —
/// S(0) is finite, not zero, so a naive wedge loses real mass.
#[allow(clippy::too_many_arguments)]
fn chirp_field_pass(
    gd: &ChirpData,
    out: &Grid,
    gamma_idx: &[usize],
    dgamma: f64,
    wedge: bool,
    alpha_cap: Option<f64>,
    tail: bool,
) -> Result<ScalarField> {
    let m = &gd.model;
    let nw = gd.ws.len();
    let us = gd.ugrid.axis_coords(0);
    let nu_nodes = us.len();
    let du = gd.ugrid.spacing[0];
    let lam2 = m.lambda * m.lambda;
    let ng = gamma_idx.len();

    // Two ways a slow row goes bad.  If the data has not decayed at the
    // u-grid edges, its Fresnel sum misses the tails — a global test.  And
    // whatever the acquisition cut off beyond t_max enters S(·, x₁) only
    // through rows slower than ridge_cut·λ/(2(t_max − |x₁|/λ)) — a floor
    // that tightens toward the sides of the output window.  In wedge mode
    // the failing block is excluded and rebuilt by extrapolation below.
    let x1s = out.axis_coords(0);
    let nx1 = x1s.len();
    let lo_cols: Vec<usize> = if wedge {
        let edge_nodes = ((nu_nodes as f64 * 0.02).ceil() as usize).max(1);
        let mut lo_edge = 0;
        for (gi, &iw) in gamma_idx.iter().enumerate() {
            let mut row_max = 0.0f64;
            let mut edge_max = 0.0f64;
            for j in 0..nu_nodes {
                let a = gd.values[j * nw + iw].norm();
                row_max = row_max.max(a);
                if j < edge_nodes || j >= nu_nodes - edge_nodes {
                    edge_max = edge_max.max(a);
                }
            }
            if row_max > 0.0 && edge_max > 0.02 * row_max {
                lo_edge = gi + 1;
            }
        }
        x1s.iter()
            .map(|&x1| {
                let floor = if gd.ridge_cut > 0.0 {
                    let eff_t = (gd.t_max - x1.abs() / m.lambda).max(0.25 * gd.t_max);
                    gd.ridge_cut * m.lambda / (2.0 * eff_t)
                } else {
                    0.0
                };
                let mut lo = lo_edge;
                while lo < ng && gd.ws[gamma_idx[lo]] < floor {
                    lo += 1;
                }
                lo
            })
            .collect()
    } else {
        vec![0; nx1]
    };
    if lo_cols.iter().any(|&lo| ng - lo < 6) {
        return Err(Error::InvalidGrid(
            "the data grid truncates all but a handful of γ rows; widen the grids \
             or raise the γ range"
                .into(),
        ));
    }

    // S[γ][x₁] = ∫ e^{iαx₁/λ} e^{−iα²/4γ} G(αλ/2γ, γ) dα, evaluated through
    // the substitution α = 2γu/λ as (2γ/λ)·∫ G(u,γ) e^{iγ(2ux₁−u²)/λ²} du.
    // The integrand is read at the native u-nodes — no interpolation, so the
    // row sums stay exact wherever the u-grid resolves the combined phase.
    let x1s = out.axis_coords(0);
    let nx1 = x1s.len();
    let mut s_tab = vec![Complex::new(0.0, 0.0); ng * nx1];
    crate::exec::fill_cells_complex(&mut s_tab, |flat| {
        let (gi, ix) = (flat / nx1, flat % nx1);
        let iw = gamma_idx[gi];
        let gamma = gd.ws[iw];
        let x1 = x1s[ix];
        let window = alpha_cap.map(|a| a * m.lambda / (2.0 * gamma));
        let mut acc = Complex::new(0.0, 0.0);
        for (j, &u) in us.iter().enumerate() {
            if let Some(wdw) = window {
                if u.abs() > wdw {
                    continue;
                }
            }
            let g = gd.values[j * nw + iw];
            acc += g * Complex::from_polar(1.0, gamma * (2.0 * u * x1 - u * u) / lam2);
        }
        acc * (2.0 * gamma / m.lambda) * du
    });

    // Wedge closure [0, γ_lo]: after removing the geometric phase e^{iγq},
    // q = (x₁/λ)², the dephased S̃ = e^{−iγq}·S(γ,x₁) is a pure moment series
    // of the fold profile — smooth down to γ = 0 with the finite limit
    // 4πC·∫k dr.  A quadratic in γ fitted to the first trustworthy rows
    // extrapolates it reliably, and the segment integrates in closed form.
    let gamma_top = gd.ws[gamma_idx[ng - 1]];
    let wedge_coef: Vec<[Complex<f64>; 3]> = if wedge {
        (0..nx1)
            .map(|ix| {
                let lo = lo_cols[ix];
                let q = (x1s[ix] / m.lambda).powi(2);
                let gamma_lo = gd.ws[gamma_idx[lo]];
                let span = gamma_lo
                    .max(6.0 * dgamma)
                    .max(0.5)
                    .min((gamma_top - gamma_lo) / 3.0);
                let mut nfit = (lo..ng)
                    .take_while(|&gi| gd.ws[gamma_idx[gi]] <= gamma_lo + span)
                    .count();
                nfit = nfit.clamp(5.min(ng - lo), ng - lo);
                let gs: Vec<f64> = (lo..lo + nfit).map(|gi| gd.ws[gamma_idx[gi]]).collect();
                let g0 = gs.iter().sum::<f64>() / nfit as f64;
                // Normal equations of the least-squares quadratic in τ = γ − γ̄.
                let mut p = [0.0f64; 5];
                let mut b = [Complex::new(0.0, 0.0); 3];
                for (k, &g) in gs.iter().enumerate() {
                    let t = g - g0;
                    let mut tk = 1.0;
                    for pk in p.iter_mut() {
                        *pk += tk;
                        tk *= t;
                    }
                    let s = s_tab[(lo + k) * nx1 + ix] * Complex::from_polar(1.0, -g * q);
                    b[0] += s;
                    b[1] += s * t;
                    b[2] += s * t * t;
                }
                let mat = [[p[0], p[1], p[2]], [p[1], p[2], p[3]], [p[2], p[3], p[4]]];
                let a = solve3(&mat, &b);
                // Re-express a₀ + a₁τ + a₂τ² in powers of γ.
                [
                    a[0] - a[1] * g0 + a[2] * g0 * g0,
                    a[1] - 2.0 * g0 * a[2],
                    a[2],
                ]
            })
            .collect()
    } else {
        Vec::new()
    };

    // Fold asymptotics beyond γ_top: k̂_γ ≈ e^{−iγq}(c·γ^{−1/2} + d·γ^{−3/2}),
    // so √γ·e^{iγq}·k̂_γ ≈ c + d/γ. Fitting both terms over the top half of
    // the rows removes the O(1/γ) bias a plain average of c would carry, and
    // d buys one more order in the completed tail.
    let four_pi_c = 4.0 * std::f64::consts::PI * m.c_lambda;
    let fold: Vec<[Complex<f64>; 2]> = if tail {
        (0..nx1)
            .map(|ix| {
                let lo = lo_cols[ix];
                let start = ng - ((ng - lo) / 2).max(2).min(ng - lo);
                let q = (x1s[ix] / m.lambda).powi(2);
                let mut z0 = 0.0f64;
                let mut z1 = 0.0f64;
                let mut z2 = 0.0f64;
                let mut m0 = Complex::new(0.0, 0.0);
                let mut m1 = Complex::new(0.0, 0.0);
                for gi in start..ng {
                    let gamma = gd.ws[gamma_idx[gi]];
                    let z = 1.0 / gamma;
                    z0 += 1.0;
                    z1 += z;
                    z2 += z * z;
                    let v = s_tab[gi * nx1 + ix].conj()
                        * Complex::from_polar(gamma.sqrt() / four_pi_c, gamma * q);
                    m0 += v;
                    m1 += v * z;
                }
                let det = z0 * z2 - z1 * z1;
                if det.abs() > 1e-12 * z0 * z2 {
                    let d = (m1 * z0 - m0 * z1) / det;
                    let c = (m0 - d * z1) / z0;
                    [c, d]
                } else {
                    [m0 / z0, Complex::new(0.0, 0.0)]
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let fresnel_limit =
        Complex::from_polar(0.5 * std::f64::consts::PI.sqrt(), std::f64::consts::FRAC_PI_4);

    // f(x) = (2x₂/ν)·k(x₁/λ, r(x)) with k = (1/4π²C)·∫₀^∞ Re[S e^{−iγr}] dγ,
    // the band beyond γ_max completed by the Fresnel form of the fold terms.
    let x2s = out.axis_coords(1);
    let norm = 2.0 / (m.nu * m.c_lambda * (2.0 * std::f64::consts::PI).powi(2));
    let mut field = ScalarField::zeros(out.clone());
    let dims1 = out.dims[1];
    for (ix, &x1) in x1s.iter().enumerate() {
        let lo = lo_cols[ix];
        let q = (x1 / m.lambda).powi(2);
        let gamma_lo = gd.ws[gamma_idx[lo]];
        for (jx, &x2) in x2s.iter().enumerate() {
            if x2 <= 0.0 {
                continue;
            }
            let r = q + (x2 / m.nu).powi(2);
            let mut acc = 0.0;
            for gi in lo..ng {
                let gamma = gd.ws[gamma_idx[gi]];
                let wt = if gi == lo || gi == ng - 1 {
                    0.5 * dgamma
                } else {
                    dgamma
                };
                let rot = Complex::from_polar(wt, -gamma * r);
                acc += (rot * s_tab[gi * nx1 + ix]).re;
            }
            if wedge {
                // ∫₀^{γ_lo} Re[(c₀+c₁γ+c₂γ²)·e^{iγq}·e^{−iγr}] dγ in closed form.
                let sm = span_moments(gamma_lo, q - r);
                let c = &wedge_coef[ix];
                acc += (c[0] * sm[0] + c[1] * sm[1] + c[2] * sm[2]).re;
            }
            let mut value = x2 * norm * acc;
            if tail {
                let s = x2 / m.nu;
                let fres = fresnel_limit - fresnel_e(gamma_top.sqrt() * s);
                let [c, d] = fold[ix];
                value += 4.0 / std::f64::consts::PI * (c * fres).re;
                // d-order of the completed tail: ∫_{γ_top}^∞ γ^{−3/2} e^{−iγs²} dγ
                // = 2e^{−iγ_top s²}/√γ_top − 4is·conj(F∞ − F(s√γ_top)).
                let t2 = 2.0 * Complex::from_polar(1.0 / gamma_top.sqrt(), -gamma_top * s * s)
                    - Complex::new(0.0, 4.0 * s) * fres.conj();
                value += 2.0 * s / std::f64::consts::PI * (d.conj() * t2).re;
            }
            field.values[ix * dims1 + jx] = value;
        }
    }
    // Mirror onto x₂ < 0; a node at exactly x₂ = 0 gets the even-reflection
    // value of its neighbor plane.
    for ix in 0..nx1 {
        for jx in 0..dims1 {
            let x2 = x2s[jx];
            if x2 < 0.0 {
                field.values[ix * dims1 + jx] = field.values[ix * dims1 + (dims1 - 1 - jx)];
            } else if x2 == 0.0 && jx + 1 < dims1 {
                field.values[ix * dims1 + jx] = field.values[ix * dims1 + jx + 1];
            }
        }
    }
    Ok(field)
}

/// Rebuild the field from chirp data on `out` by the double phase integral,
/// summing 2·Re over the positive-γ half of a uniform w grid.  Each γ row
/// is an exact-node Fresnel sum over the data, so the u-spacing must
/// resolve the combined chirp phase: Δu ≲ πλ²/(2γ_max·(support + |x₁|max)).
/// The fold singularity of the folded profile makes the raw γ-integral
/// converge slowly, so by default the band beyond γ_max is completed with
/// its closed-form Fresnel asymptotics, calibrated row-wise from the data.
pub fn invert_chirp(gd: &ChirpData, out: &Grid, opts: &ChirpInversion) -> Result<ScalarField> {
    let m = &gd.model;
    if m.n != 2 {
        return Err(Error::Unsupported(
            "chirp inversion is implemented in the plane".into(),
        ));
    }
    if out.rank() != 2 {
        return Err(Error::InvalidGrid("output grid must be planar".into()));
    }
    if !out.last_axis_symmetric() {
        return Err(Error::InvalidGrid(
            "output grid must be reflection-symmetric in the last axis".into(),
        ));
    }
    let nw = gd.ws.len();
    if nw < 8 {
        return Err(Error::InvalidGrid("chirp inversion needs a dense w grid".into()));
    }
    let dw = gd.ws[1] - gd.ws[0];
    if gd
        .ws
        .windows(2)
        .any(|p| ((p[1] - p[0]) - dw).abs() > 1e-9 * dw)
    {
        return Err(Error::InvalidGrid("chirp inversion needs a uniform w grid".into()));
    }

    let gamma_cap = opts.gamma_max.unwrap_or(gd.ws[nw - 1]);
    let gamma_min = opts.gamma_min.unwrap_or(0.0);
    if !(gamma_min >= 0.0) || gamma_min >= gamma_cap {
        return Err(Error::InvalidModel("need 0 ≤ gamma_min < gamma_max".into()));
    }
    let tiny = 1e-9 * dw;
    let gamma_idx: Vec<usize> = (0..nw)
        .filter(|&i| gd.ws[i] > gamma_min.max(tiny) && gd.ws[i] <= gamma_cap + tiny)
        .collect();
    if gamma_idx.len() < 8 {
        return Err(Error::InvalidGrid("fewer than 8 usable γ rows".into()));
    }
    let wedge = gamma_min == 0.0;

    // Warn when the data grid visibly truncates the transform: compare the
    // mass on the outermost 5% bands of each axis against the total.
    let total: f64 = gd.values.iter().map(|v| v.norm()).sum();
    if total > 0.0 {
        let edge_u = ((gd.ugrid.len() as f64 * 0.05).ceil() as usize).max(1);
        let edge_w = ((nw as f64 * 0.05).ceil() as usize).max(1);
        let mut edge = 0.0;
        for iu in 0..gd.ugrid.len() {
            for iw in 0..nw {
                if iu < edge_u || iu >= gd.ugrid.len() - edge_u || iw < edge_w || iw >= nw - edge_w
                {
                    edge += gd.at(iu, iw).norm();
                }
            }
        }
        if edge > 0.01 * total {
            log::warn!(
                "chirp data carries {:.1}% of its mass on the grid edges; \
                 the inversion truncates that tail",
                100.0 * edge / total
            );
        }
    }

    let fine = chirp_field_pass(gd, out, &gamma_idx, dw, wedge, opts.alpha_max, opts.tail)?;
    if !opts.richardson {
        return Ok(fine);
    }
    let coarse_g: Vec<usize> = gamma_idx.iter().copied().step_by(2).collect();
    if coarse_g.len() < 5 {
        return Err(Error::InvalidGrid("too few γ rows for Richardson".into()));
    }
    let coarse = chirp_field_pass(gd, out, &coarse_g, 2.0 * dw, wedge, opts.alpha_max, opts.tail)?;
    let mut field = fine;
    for (v, c) in field.values.iter_mut().zip(&coarse.values) {
        *v += (*v - c) / 3.0;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{Phantom, PhantomSet};
    use crate::quad::{composite_gl, unit_disk};
    use crate::transform::{derived_exact, forward_at, SinoGrid};

    fn model() -> EccentricityModel {
        EccentricityModel::new(std::f64::consts::SQRT_2, 2).unwrap()
    }

    fn chirp_setup(ph: &PhantomSet, ws: &[f64]) -> ChirpData {
        let m = model();
        let t_max = 6.0;
        let ext = 3.0 + m.lambda * t_max;
        let nu_nodes = (2.0 * ext / 0.05).ceil() as usize | 1;
        let ug = Grid::centered(vec![nu_nodes], vec![0.05]).unwrap();
        let sg = SinoGrid::new(ug, 0.025, 240).unwrap();
        let data = derived_exact(&m, ph, &sg, 96).unwrap();
        compute_g(&data, ws).unwrap()
    }

    fn gaussian_set(amp: f64, c1: f64, s: f64) -> PhantomSet {
        PhantomSet(vec![Phantom::gaussian(amp, vec![c1, 0.0], vec![s, s]).unwrap()])
    }

    /// Direct quadrature of G(u,w) = C ∫ f(λy₁+u₁, νy₂) e^{iw|y|²} dy — an
    /// exact identity obtained by integrating the sphere sections in t.
    fn coarea_oracle(m: &EccentricityModel, set: &PhantomSet, u: f64, w: f64) -> Complex<f64> {
        let reach = 3.0;
        let b1 = (reach + u.abs()) / m.lambda;
        let b2 = reach / m.nu;
        let panels = 4 + (w.abs() * (b1 * b1 + b2 * b2) / 6.0).ceil() as usize;
        let (n1, w1) = composite_gl(-b1, b1, panels, 16);
        let (n2, w2) = composite_gl(-b2, b2, panels, 16);
        let mut acc = Complex::new(0.0, 0.0);
        for (y1, a1) in n1.iter().zip(&w1) {
            for (y2, a2) in n2.iter().zip(&w2) {
                let f = set.eval(&[m.lambda * y1 + u, m.nu * y2]);
                acc += Complex::from_polar(a1 * a2 * f, w * (y1 * y1 + y2 * y2));
            }
        }
        acc * m.c_lambda
    }

    #[test]
    fn zero_frequency_row_is_volume_data() {
        let m = model();
        let set = gaussian_set(1.0, 0.0, 0.35);
        let gd = chirp_setup(&set, &[0.0]);
        let rule = unit_disk(48, 64);
        let mut peak = 0.0f64;
        for iu in 0..gd.ugrid.len() {
            peak = peak.max(gd.at(iu, 0).norm());
        }
        for u in [0.0, 0.8, -1.6] {
            let iu = gd
                .ugrid
                .axis_coords(0)
                .iter()
                .position(|v| (v - u).abs() < 1e-9)
                .unwrap();
            let vol = forward_at(&m, &set, &[u], 6.0, &rule).unwrap();
            let g = gd.at(iu, 0);
            assert!(
                (g.re - vol).abs() <= 1e-3 * peak && g.im.abs() <= 1e-12 * peak,
                "u={u}: chirp row {g} vs volume {vol}"
            );
        }
    }

    #[test]
    fn matches_coarea_oracle() {
        let m = model();
        let set = gaussian_set(1.0, 0.0, 0.35);
        let ws = [0.0, 3.7, 12.0];
        let gd = chirp_setup(&set, &ws);
        let probes: Vec<(f64, f64)> = [0.0, 0.8]
            .iter()
            .flat_map(|&u| ws.iter().map(move |&w| (u, w)))
            .collect();
        let oracle: Vec<Complex<f64>> = probes
            .iter()
            .map(|&(u, w)| coarea_oracle(&m, &set, u, w))
            .collect();
        let scale = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (&(u, w), want) in probes.iter().zip(&oracle) {
            let iu = gd
                .ugrid
                .axis_coords(0)
                .iter()
                .position(|v| (v - u).abs() < 1e-9)
                .unwrap();
            let iw = ws.iter().position(|&v| v == w).unwrap();
            let got = gd.at(iu, iw);
            assert!(
                (got - want).norm() <= 1e-4 * scale,
                "u={u}, w={w}: {got} vs oracle {want}"
            );
        }
    }

    #[test]
    fn reality_constraint_holds() {
        let set = gaussian_set(0.7, 0.4, 0.3);
        let ws: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.5).collect();
        let gd = chirp_setup(&set, &ws);
        let peak = gd.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(gd.hermitian_gap() <= 1e-13 * peak);
    }

    #[test]
    fn profile_spectrum_probe_properties() {
        let m = model();
        let set = gaussian_set(1.0, 0.0, 0.35);
        let ws: Vec<f64> = (-32..=32).map(|i| i as f64 * 0.25).collect();
        let gd = chirp_setup(&set, &ws);
        // α = 0 collapses to a pure G readout.
        let k0 = compute_k(&gd, 0.0, 3.0, 0.5).unwrap();
        let want = gd.interp(&[0.0], -3.0).unwrap() / (2.0 * m.c_lambda);
        assert!((k0 - want).norm() <= 1e-12 * want.norm());
        // Real profile ⇒ K(−α,−γ) = conj K(α,γ).
        let a = compute_k(&gd, 1.3, 2.5, 0.5).unwrap();
        let b = compute_k(&gd, -1.3, -2.5, 0.5).unwrap();
        assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1e-30));
        // Guards: small |γ|, off-grid w.
        assert!(compute_k(&gd, 1.0, 0.2, 0.5).is_err());
        assert!(compute_k(&gd, 1.0, 40.0, 0.5).is_err());
        assert!(compute_k(&gd, 1.0, 2.0, 0.0).is_err());
    }

    /// Direct (α,γ)-quadrature of the folded profile through the smooth
    /// substitution r = x₁² + s²: K(α,γ) = ∬ f(λx₁, νs)·e^{−iαx₁−iγ(x₁²+s²)}.
    fn k_oracle(m: &EccentricityModel, set: &PhantomSet, alpha: f64, gamma: f64) -> Complex<f64> {
        let b1 = 3.2 / m.lambda;
        let b2 = 3.2 / m.nu;
        let panels = 4 + (gamma.abs() * (b1 * b1 + b2 * b2) / 4.0).ceil() as usize;
        let (n1, w1) = composite_gl(-b1, b1, panels, 16);
        let (n2, w2) = composite_gl(0.0, b2, panels, 16);
        let mut acc = Complex::new(0.0, 0.0);
        for (x1, a1) in n1.iter().zip(&w1) {
            for (s, a2) in n2.iter().zip(&w2) {
                let f = set.eval(&[m.lambda * x1, m.nu * s]);
                acc += Complex::from_polar(a1 * a2 * f, -alpha * x1 - gamma * (x1 * x1 + s * s));
            }
        }
        acc
    }

    #[test]
    fn profile_spectrum_matches_direct_quadrature() {
        let m = model();
        let ws: Vec<f64> = (-32..=32).map(|i| i as f64 * 0.25).collect();
        let variants = [
            gaussian_set(1.0, 0.0, 0.35),
            gaussian_set(0.8, 0.5, 0.45),
            PhantomSet(vec![
                Phantom::gaussian(1.0, vec![-0.4, 0.0], vec![0.4, 0.35]).unwrap(),
                Phantom::gaussian(0.6, vec![0.7, 0.0], vec![0.5, 0.4]).unwrap(),
            ]),
        ];
        for set in &variants {
            let gd = chirp_setup(set, &ws);
            let mut probes = Vec::new();
            let mut oracle = Vec::new();
            for &alpha in &[0.0, 1.5, 4.0] {
                for &gamma in &[2.0, 4.5, 7.0] {
                    probes.push(compute_k(&gd, alpha, gamma, 0.5).unwrap());
                    oracle.push(k_oracle(&m, set, alpha, gamma));
                }
            }
            let scale = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (got, want) in probes.iter().zip(&oracle) {
                assert!(
                    (got - want).norm() <= 1e-3 * scale,
                    "{got} vs {want} (scale {scale:.3e})"
                );
            }
        }
    }

    #[test]
    fn folded_profile_reads_back_the_field() {
        let m = model();
        let set = gaussian_set(0.9, 0.3, 0.4);
        // f(x) = (2x₂/ν)·k(x₁/λ, r(x)) wherever x₂ > 0.
        for x in [[0.2, 0.5], [-0.6, 1.1], [0.9, 0.05]] {
            let r = (x[0] / m.lambda).powi(2) + (x[1] / m.nu).powi(2);
            let k = k_eval(&m, &set, &[x[0] / m.lambda], r);
            let f = set.eval(&x);
            assert!(
                ((2.0 * x[1] / m.nu) * k - f).abs() <= 1e-12 * f.abs().max(1e-12),
                "x={x:?}"
            );
        }
        // Off the paraboloid interior the profile vanishes.
        assert_eq!(k_eval(&m, &set, &[1.0], 0.5), 0.0);
        assert_eq!(k_eval(&m, &set, &[0.0], 0.0), 0.0);
    }

    #[test]
    fn fresnel_integral_matches_quadrature() {
        for &x in &[0.3f64, 1.7, 3.4, 3.7, 6.0] {
            let panels = 4 + (x * x).ceil() as usize;
            let (nodes, wts) = composite_gl(0.0, x, panels, 16);
            let mut want = Complex::new(0.0, 0.0);
            for (t, w) in nodes.iter().zip(&wts) {
                want += Complex::from_polar(*w, t * t);
            }
            let got = fresnel_e(x);
            assert!(
                (got - want).norm() <= 1e-9,
                "x={x}: {got} vs quadrature {want}"
            );
        }
    }

    #[test]
    fn zero_data_inverts_to_zero() {
        let m = model();
        let ug = Grid::centered(vec![101], vec![0.2]).unwrap();
        let ws: Vec<f64> = (1..=100).map(|i| i as f64 * 0.25).collect();
        let gd = ChirpData {
            model: m,
            ugrid: ug,
            ws: ws.clone(),
            values: vec![Complex::new(0.0, 0.0); 101 * ws.len()],
            t_max: 6.0,
            ridge_cut: 0.0,
        };
        let out = Grid::centered(vec![16, 16], vec![0.1, 0.1]).unwrap();
        let f = invert_chirp(&gd, &out, &ChirpInversion::default()).unwrap();
        assert_eq!(f.max_abs(), 0.0);
    }

    #[test]
    fn gaussian_chirp_inversion_smoke() {
        let m = model();
        let set = gaussian_set(1.0, 0.0, 0.5);
        // u-spacing must resolve the chirp phase at γ_max across the output
        // window: Δu ≤ πλ²/(2γ_max·(3σ + |x₁|max)) ≈ 0.0206 here.
        let ext = 1.5 + m.lambda * 6.0 + 0.2;
        let nu_nodes = (2.0 * ext / 0.02).ceil() as usize | 1;
        let ug = Grid::centered(vec![nu_nodes], vec![0.02]).unwrap();
        let sg = SinoGrid::new(ug, 0.025, 240).unwrap();
        let data = derived_exact(&m, &set, &sg, 96).unwrap();
        let ws: Vec<f64> = (1..=500).map(|i| i as f64 * 0.1).collect();
        let gd = compute_g(&data, &ws).unwrap();
        let out = Grid::centered(vec![32, 32], vec![0.1, 0.1]).unwrap();
        let plain = invert_chirp(&gd, &out, &ChirpInversion::default()).unwrap();
        let truth = crate::phantom::sample_phantom(&set, out.clone());
        let err = plain.rel_l2_error(&truth);
        assert!(err <= 0.05, "relative L² error {err:.3}");
        let rich = invert_chirp(
            &gd,
            &out,
            &ChirpInversion {
                richardson: true,
                ..Default::default()
            },
        )
        .unwrap();
        let drift = rich.rel_l2_error(&plain);
        assert!(
            drift <= 0.05,
            "fine and extrapolated fields disagree by {drift:.3}"
        );
        let err_rich = rich.rel_l2_error(&truth);
        assert!(err_rich <= 0.05, "extrapolated L² error {err_rich:.3}");
    }

    #[test]
    fn inversion_validates_its_inputs() {
        let m = model();
        let ug = Grid::centered(vec![11], vec![0.2]).unwrap();
        let mk = |ws: Vec<f64>| ChirpData {
            model: m,
            ugrid: ug.clone(),
            ws: ws.clone(),
            values: vec![Complex::new(0.0, 0.0); 11 * ws.len()],
            t_max: 6.0,
            ridge_cut: 0.0,
        };
        let out = Grid::centered(vec![8, 8], vec![0.2, 0.2]).unwrap();
        // No positive γ rows to integrate.
        let gd = mk((-40..=-1).map(|i| i as f64 * 0.25).collect());
        assert!(invert_chirp(&gd, &out, &ChirpInversion::default()).is_err());
        // Nonuniform w grid.
        let mut ws: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.25).collect();
        ws[5] += 0.01;
        assert!(invert_chirp(&mk(ws), &out, &ChirpInversion::default()).is_err());
        // Empty spectral box.
        let gd = mk((1..=40).map(|i| i as f64 * 0.25).collect());
        let opts = ChirpInversion {
            gamma_min: Some(12.0),
            gamma_max: Some(3.0),
            ..Default::default()
        };
        assert!(invert_chirp(&gd, &out, &opts).is_err());
        // Shifted output grid breaks the reflection symmetry.
        let bad = Grid::new(vec![8, 8], vec![-0.8, 0.0], vec![0.2, 0.2]).unwrap();
        assert!(invert_chirp(&gd, &bad, &ChirpInversion::default()).is_err());
    }
}
