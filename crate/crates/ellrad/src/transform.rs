//! The forward volume transform, its derived boundary data, the back
//! projection, the duality pairing, and the moment operator.
//!
//! Forward map (volume integral over one ellipsoid, unit-ball form):
//!
//!   R f(u,t) = C(λ) tⁿ ∫_{|y|≤1} f(λty₁+u₁, νtỹ+ũ, νtyₙ) dy.
//!
//! Derived data (the sphere integral obtained by differentiating in t and
//! dividing by t^{n−1}):
//!
//!   g(u,t) = t^{1−n} ∂ₜ R f(u,t) = C(λ) ∫_{S^{n−1}} f(λty₁+u₁, νtỹ+ũ, νtyₙ) dσ(y).
//!
//! Back projection:
//!
//!   R* g(x) = ∫ g(u, ρ(x,u)) du,   ρ(x,u) = √((x₁−u₁)²/λ² + |x̃−ũ|²/ν² + xₙ²/ν²),
//!
//! and the duality pairing ⟨∂ₜRf, g⟩_{du dt} = ⟨f, R*g⟩_{dx} (the pairing
//! constant is exactly 1 — confirmed by quadrature on both sides).
//!
//! The sphere integrals are restricted to the spherical cap of directions
//! that can meet the support ball of the field: |ty − p| ≤ R/ν with
//! p = ((c₁−u₁)/λ, (c̃−ũ)/ν, cₙ/ν) for a support ball of center c and
//! radius R.  The cap shrinks like 1/t exactly as the angular footprint of
//! the support does, so a fixed node count resolves every t.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};
use crate::model::EccentricityModel;
use crate::phantom::Scene;
use crate::quad::{gauss_legendre, Rule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// Volume integrals R f(u,t).
    Volume,
    /// Derived data g(u,t) = t^{1−n} ∂ₜ R f(u,t).
    Derived,
}

/// Product grid for data arrays: a uniform u-box in ℝ^{n−1} times a
/// uniform t-axis t_k = (k+1)·dt, k = 0..nt−1 — the node set excludes t=0,
/// where the derived data has a removable limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinoGrid {
    pub ugrid: Grid,
    pub dt: f64,
    pub nt: usize,
}

impl SinoGrid {
    pub fn new(ugrid: Grid, dt: f64, nt: usize) -> Result<Self> {
        if !(dt > 0.0) || nt == 0 {
            return Err(Error::InvalidGrid(format!(
                "t axis needs dt > 0 and nt >= 1, got dt={dt}, nt={nt}"
            )));
        }
        Ok(Self { ugrid, dt, nt })
    }

    pub fn t(&self, k: usize) -> f64 {
        (k as f64 + 1.0) * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.nt as f64 * self.dt
    }

    pub fn t_coords(&self) -> Vec<f64> {
        (0..self.nt).map(|k| self.t(k)).collect()
    }

    pub fn len(&self) -> usize {
        self.ugrid.len() * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index with t fastest.
    pub fn flat(&self, iu: usize, it: usize) -> usize {
        iu * self.nt + it
    }

    /// Whether the u-box covers a support box dilated by λ·t_max along x₁
    /// and ν·t_max along the remaining hyperplane axes — the set of centers
    /// whose ellipsoids with t ≤ t_max can reach the support.
    pub fn covers(&self, model: &EccentricityModel, lo: &[f64], hi: &[f64]) -> bool {
        let tm = self.t_max();
        for axis in 0..self.ugrid.rank() {
            let dilation = if axis == 0 { model.lambda } else { model.nu } * tm;
            let u_lo = self.ugrid.coord(axis, 0);
            let u_hi = self.ugrid.coord(axis, self.ugrid.dims[axis] - 1);
            if u_lo > lo[axis] - dilation + 1e-9 || u_hi < hi[axis] + dilation - 1e-9 {
                return false;
            }
        }
        true
    }
}

/// Data samples on a [`SinoGrid`]: volume integrals or derived data,
/// u-major with t fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    pub model: EccentricityModel,
    pub grid: SinoGrid,
    pub kind: DataKind,
    pub values: Vec<f64>,
}

impl Sinogram {
    pub fn at(&self, iu: usize, it: usize) -> f64 {
        self.values[self.grid.flat(iu, it)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest |value| on the boundary of the (u,t) box (all u-edges, plus
    /// the first and last t plane).
    pub fn boundary_max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        let ug = &self.grid.ugrid;
        let nt = self.grid.nt;
        for iu in 0..ug.len() {
            let idx = ug.unflat(iu);
            let on_edge = idx
                .iter()
                .enumerate()
                .any(|(a, &k)| k == 0 || k == ug.dims[a] - 1);
            if on_edge {
                for it in 0..nt {
                    m = m.max(self.at(iu, it).abs());
                }
            } else {
                m = m.max(self.at(iu, 0).abs());
                m = m.max(self.at(iu, nt - 1).abs());
            }
        }
        m
    }
}

/// Support ball of a scene (center, radius): the circumscribed ball of its
/// bounding box, or None for unbounded scenes.
pub fn scene_ball(scene: &impl Scene) -> Option<(Vec<f64>, f64)> {
    let (lo, hi) = scene.bounding_box()?;
    let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let radius = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| 0.25 * (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    Some((center, radius))
}

/// One forward sample: C(λ) tⁿ Σ w f(λty₁+u₁, νtỹ+ũ, νtyₙ) over a unit-ball
/// rule.
pub fn forward_at(
    model: &EccentricityModel,
    scene: &impl Scene,
    u: &[f64],
    t: f64,
    rule: &Rule,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::OutOfDomain(format!("half focal distance t={t} must be > 0")));
    }
    let n = model.n;
    debug_assert_eq!(rule.dim, n);
    debug_assert_eq!(u.len(), n - 1);
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..rule.len() {
        let y = rule.pt(i);
        x[0] = model.lambda * t * y[0] + u[0];
        for a in 1..n - 1 {
            x[a] = model.nu * t * y[a] + u[a];
        }
        x[n - 1] = model.nu * t * y[n - 1];
        acc += rule.wts[i] * scene.eval(&x);
    }
    Ok(model.c_lambda * t.powi(n as i32) * acc)
}

/// Forward transform on a full data grid.  Warns when the u-box does not
/// cover the dilated support (the zero-extension assumed downstream would
/// then be unfaithful).
pub fn forward(
    model: &EccentricityModel,
    scene: &impl Scene,
    grid: &SinoGrid,
    rule: &Rule,
) -> Result<Sinogram> {
    if grid.ugrid.rank() != model.n - 1 {
        return Err(Error::InvalidGrid(format!(
            "u-grid rank {} does not match hyperplane dimension {}",
            grid.ugrid.rank(),
            model.n - 1
        )));
    }
    if let Some((lo, hi)) = scene.bounding_box() {
        if !grid.covers(model, &lo, &hi) {
            log::warn!(
                "sinogram u-grid does not cover the support dilated by (λ,ν)·t_max; \
                 data will be truncated"
            );
        }
    }
    let mut values = vec![0.0; grid.len()];
    let nt = grid.nt;
    let g = grid.clone();
    let m = *model;
    crate::exec::fill_cells(&mut values, |cell| {
        let iu = cell / nt;
        let it = cell % nt;
        let u = g.ugrid.point(iu);
        forward_at(&m, scene, &u, g.t(it), rule).expect("t > 0 by grid construction")
    });
    Ok(Sinogram {
        model: *model,
        grid: grid.clone(),
        kind: DataKind::Volume,
        values,
    })
}

/// Cap restriction of the unit sphere against a support ball seen from one
/// data point: directions y with |ty − p| ≤ r_y.  Returns the cos-threshold
/// (cap = {y·p̂ ≥ c_min}), or None for the full sphere; `Empty` when the
/// sphere misses the support entirely.
enum CapWindow {
    Full,
    Empty,
    Cap { c_min: f64, p_hat: Vec<f64> },
}

fn cap_window(model: &EccentricityModel, ball: &(Vec<f64>, f64), u: &[f64], t: f64) -> CapWindow {
    let (c, radius) = ball;
    let n = model.n;
    let r_y = radius / model.nu;
    let mut p = vec![0.0; n];
    p[0] = (c[0] - u[0]) / model.lambda;
    for a in 1..n - 1 {
        p[a] = (c[a] - u[a]) / model.nu;
    }
    p[n - 1] = c[n - 1] / model.nu;
    let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if p_norm * t < 1e-300 {
        return if t <= r_y { CapWindow::Full } else { CapWindow::Empty };
    }
    let c_min = (t * t + p_norm * p_norm - r_y * r_y) / (2.0 * t * p_norm);
    if c_min >= 1.0 {
        CapWindow::Empty
    } else if c_min <= -1.0 {
        CapWindow::Full
    } else {
        for v in &mut p {
            *v /= p_norm;
        }
        CapWindow::Cap { c_min, p_hat: p }
    }
}

/// One derived-data sample g(u,t) = C(λ) ∫_{S^{n−1}} f(λty₁+u₁, …) dσ(y).
///
/// `order` sets the node budget: n=2 uses `order` midpoint angles (on the
/// support arc when one exists, the full circle otherwise); n=3 uses
/// `order` Gauss–Legendre polar nodes × 2·`order` midpoint azimuths on the
/// support cap (doubled polar count on the full sphere).  Mirror-paired
/// angular nodes annihilate odd-in-xₙ integrands to rounding error.
pub fn derived_exact_at(
    model: &EccentricityModel,
    scene: &impl Scene,
    u: &[f64],
    t: f64,
    order: usize,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::OutOfDomain(format!("half focal distance t={t} must be > 0")));
    }
    let gl = if model.n == 3 {
        Some((gauss_legendre(order), gauss_legendre(2 * order)))
    } else {
        None
    };
    Ok(derived_eval(model, scene, scene_ball(scene).as_ref(), u, t, order, gl.as_ref()))
}

/// Shared kernel for [`derived_exact_at`] and [`derived_exact`]; the n=3
/// Gauss–Legendre reference nodes on [−1,1] (cap order, full-sphere order)
/// are precomputed by grid-level callers.
#[allow(clippy::type_complexity)]
fn derived_eval(
    model: &EccentricityModel,
    scene: &impl Scene,
    ball: Option<&(Vec<f64>, f64)>,
    u: &[f64],
    t: f64,
    order: usize,
    gl: Option<&((Vec<f64>, Vec<f64>), (Vec<f64>, Vec<f64>))>,
) -> f64 {
    let n = model.n;
    let lam = model.lambda;
    let nu = model.nu;
    let window = match ball {
        Some(b) => cap_window(model, b, u, t),
        None => CapWindow::Full,
    };
    if let CapWindow::Empty = window {
        return 0.0;
    }
    let mut acc = 0.0;
    if n == 2 {
        // Arc of half-width arccos(c_min) about p̂, or the full circle.
        let (base, half_width) = match &window {
            CapWindow::Full => ([1.0, 0.0], std::f64::consts::PI),
            CapWindow::Cap { c_min, p_hat } => {
                ([p_hat[0], p_hat[1]], c_min.clamp(-1.0, 1.0).acos())
            }
            CapWindow::Empty => unreachable!(),
        };
        let half = order / 2;
        let h = half_width / half as f64;
        // q̂ ⊥ p̂; nodes in mirror pairs ±δ about the arc center so that the
        // xₙ argument flips sign exactly when p̂ lies on the y₂ = 0 axis.
        let q = [-base[1], base[0]];
        for j in 0..half {
            let d = (j as f64 + 0.5) * h;
            let (sd, cd) = d.sin_cos();
            for sign in [1.0, -1.0] {
                let y0 = cd * base[0] + sign * sd * q[0];
                let y1 = cd * base[1] + sign * sd * q[1];
                acc += h * scene.eval(&[lam * t * y0 + u[0], nu * t * y1]);
            }
        }
    } else {
        // Polar Gauss–Legendre on [c_min, 1] (or [−1,1]) about the axis p̂,
        // azimuth in mirror pairs about the y₃ = 0 plane.
        let owned;
        let (glc, naz, c_lo, axis): (&(Vec<f64>, Vec<f64>), usize, f64, [f64; 3]) = match &window {
            CapWindow::Full => {
                let g = match gl {
                    Some((_, full)) => full,
                    None => {
                        owned = gauss_legendre(2 * order);
                        &owned
                    }
                };
                (g, 2 * order, -1.0, [1.0, 0.0, 0.0])
            }
            CapWindow::Cap { c_min, p_hat } => {
                let g = match gl {
                    Some((cap, _)) => cap,
                    None => {
                        owned = gauss_legendre(order);
                        &owned
                    }
                };
                (g, 2 * order, *c_min, [p_hat[0], p_hat[1], p_hat[2]])
            }
            CapWindow::Empty => unreachable!(),
        };
        // Orthonormal frame (axis, b2, b3) with b3 = e₃ whenever the axis
        // lies in the y₃ = 0 plane (the even-scene case).
        let (b2, b3) = sphere_frame(&axis);
        let mid = 0.5 * (c_lo + 1.0);
        let hw = 0.5 * (1.0 - c_lo);
        let ha = std::f64::consts::PI / (naz / 2) as f64; // azimuth step over [0, π)
        let mut x = [0.0; 3];
        for (cr, wr) in glc.0.iter().zip(&glc.1) {
            let cp = mid + hw * cr;
            let sp = (1.0 - cp * cp).max(0.0).sqrt();
            let w_pol = hw * wr * ha;
            for j in 0..naz / 2 {
                let phi = (j as f64 + 0.5) * ha;
                let (sph, cph) = phi.sin_cos();
                for sign in [1.0, -1.0] {
                    let sa = sign * sph;
                    for a in 0..3 {
                        let y = cp * axis[a] + sp * (cph * b2[a] + sa * b3[a]);
                        x[a] = if a == 0 {
                            lam * t * y + u[0]
                        } else if a == 1 {
                            nu * t * y + u[1]
                        } else {
                            nu * t * y
                        };
                    }
                    acc += w_pol * scene.eval(&x);
                }
            }
        }
    }
    model.c_lambda * acc
}

/// Orthonormal completion of a unit axis in ℝ³, preferring b3 = e₃ when the
/// axis has no y₃ component (so azimuth mirror pairs flip y₃ exactly).
fn sphere_frame(axis: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    if axis[2] == 0.0 {
        let b2 = [axis[1], -axis[0], 0.0];
        let b3 = [0.0, 0.0, 1.0];
        (b2, b3)
    } else {
        // General fallback: Gram–Schmidt against the smallest component.
        let pick = if axis[0].abs() <= axis[1].abs() && axis[0].abs() <= axis[2].abs() {
            [1.0, 0.0, 0.0]
        } else if axis[1].abs() <= axis[2].abs() {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        };
        let dot = pick[0] * axis[0] + pick[1] * axis[1] + pick[2] * axis[2];
        let mut b2 = [
            pick[0] - dot * axis[0],
            pick[1] - dot * axis[1],
            pick[2] - dot * axis[2],
        ];
        let norm = (b2[0] * b2[0] + b2[1] * b2[1] + b2[2] * b2[2]).sqrt();
        for v in &mut b2 {
            *v /= norm;
        }
        let b3 = [
            axis[1] * b2[2] - axis[2] * b2[1],
            axis[2] * b2[0] - axis[0] * b2[2],
            axis[0] * b2[1] - axis[1] * b2[0],
        ];
        (b2, b3)
    }
}

/// Derived data on a full grid by direct sphere quadrature.
pub fn derived_exact(
    model: &EccentricityModel,
    scene: &impl Scene,
    grid: &SinoGrid,
    order: usize,
) -> Result<Sinogram> {
    if grid.ugrid.rank() != model.n - 1 {
        return Err(Error::InvalidGrid(format!(
            "u-grid rank {} does not match hyperplane dimension {}",
            grid.ugrid.rank(),
            model.n - 1
        )));
    }
    let ball = scene_ball(scene);
    let gl = if model.n == 3 {
        Some((gauss_legendre(order), gauss_legendre(2 * order)))
    } else {
        None
    };
    let mut values = vec![0.0; grid.len()];
    let nt = grid.nt;
    let g = grid.clone();
    let m = *model;
    crate::exec::fill_cells(&mut values, |cell| {
        let iu = cell / nt;
        let it = cell % nt;
        let u = g.ugrid.point(iu);
        derived_eval(&m, scene, ball.as_ref(), &u, g.t(it), order, gl.as_ref())
    });
    Ok(Sinogram {
        model: *model,
        grid: grid.clone(),
        kind: DataKind::Derived,
        values,
    })
}

/// Discrete t-derivative of volume data divided by t^{n−1}: centered
/// differences inside, second-order one-sided stencils at both ends.
pub fn derive_numeric(s: &Sinogram) -> Result<Sinogram> {
    if s.kind != DataKind::Volume {
        return Err(Error::Unsupported(
            "derive_numeric expects volume data".into(),
        ));
    }
    let nt = s.grid.nt;
    if nt < 3 {
        return Err(Error::InvalidGrid(format!(
            "t axis needs at least 3 nodes for differentiation, got {nt}"
        )));
    }
    let dt = s.grid.dt;
    let nm1 = (s.model.n - 1) as i32;
    let mut values = vec![0.0; s.values.len()];
    for iu in 0..s.grid.ugrid.len() {
        let row = &s.values[iu * nt..(iu + 1) * nt];
        let out = &mut values[iu * nt..(iu + 1) * nt];
        out[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * dt);
        for k in 1..nt - 1 {
            out[k] = (row[k + 1] - row[k - 1]) / (2.0 * dt);
        }
        out[nt - 1] = (3.0 * row[nt - 1] - 4.0 * row[nt - 2] + row[nt - 3]) / (2.0 * dt);
        for (k, v) in out.iter_mut().enumerate() {
            *v /= s.grid.t(k).powi(nm1);
        }
    }
    Ok(Sinogram {
        model: s.model,
        grid: s.grid.clone(),
        kind: DataKind::Derived,
        values,
    })
}

/// Linear interpolation of one u-row of derived data in t, with virtual
/// zero nodes at t=0 and beyond t_max (the discrete zero extension).
#[inline]
fn interp_t(row: &[f64], dt: f64, rho: f64) -> f64 {
    let s = rho / dt - 1.0;
    if s <= -1.0 {
        return 0.0;
    }
    if s < 0.0 {
        // between the virtual zero node at t=0 and the first sample
        return (s + 1.0) * row[0];
    }
    let k = s as usize;
    if k + 1 < row.len() {
        let frac = s - k as f64;
        row[k] * (1.0 - frac) + row[k + 1] * frac
    } else if k < row.len() {
        // taper to the virtual zero node one step past the end
        row[k] * (1.0 - (s - k as f64))
    } else {
        0.0
    }
}

/// Back projection at one field point: trapezoid sum over the u-grid of
/// g(u, ρ(x,u)).
pub fn backproject_at(g: &Sinogram, x: &[f64]) -> f64 {
    let ug = &g.grid.ugrid;
    let nt = g.grid.nt;
    let dt = g.grid.dt;
    let du = ug.cell_volume();
    let mut acc = 0.0;
    for iu in 0..ug.len() {
        let idx = ug.unflat(iu);
        let mut w = du;
        for (a, &k) in idx.iter().enumerate() {
            if k == 0 || k == ug.dims[a] - 1 {
                w *= 0.5;
            }
        }
        let u = ug.point(iu);
        let rho = g.model.scaled_dist(x, &u);
        acc += w * interp_t(&g.values[iu * nt..(iu + 1) * nt], dt, rho);
    }
    acc
}

/// Back projection onto a target grid.  Warns when the data is not
/// negligible on its (u,t) boundary — the zero extension then truncates
/// real signal (bias from the finite data window).
pub fn backproject(g: &Sinogram, target: &Grid) -> Result<ScalarField> {
    if g.kind != DataKind::Derived {
        return Err(Error::Unsupported(
            "backproject expects derived data".into(),
        ));
    }
    if target.rank() != g.model.n {
        return Err(Error::InvalidGrid(format!(
            "target rank {} does not match dimension {}",
            target.rank(),
            g.model.n
        )));
    }
    let peak = g.max_abs();
    if peak > 0.0 {
        let edge = g.boundary_max_abs();
        if edge > 1e-6 * peak {
            log::warn!(
                "derived data is not small on its grid boundary (edge {:.3e} vs peak {:.3e}); \
                 back projection carries truncation bias",
                edge,
                peak
            );
        }
    }
    let mut field = ScalarField::zeros(target.clone());
    let grid = field.grid.clone();
    crate::exec::fill_cells(&mut field.values, |i| backproject_at(g, &grid.point(i)));
    Ok(field)
}

/// Both sides of the duality pairing and their relative gap:
/// lhs = ∬ ∂ₜRf·γ du dt with ∂ₜRf = t^{n−1}·(derived data by sphere
/// quadrature); rhs = ∫ f·R*γ dx with the test function γ evaluated
/// analytically at ρ(x,u).  Trapezoid rules throughout; both test
/// functions must be compactly supported inside their grids, so every
/// trapezoid error is aliasing-dominated and collapses much faster than
/// second order under grid doubling.
pub fn duality_residual<S, G>(
    model: &EccentricityModel,
    scene: &S,
    gamma: G,
    sgrid: &SinoGrid,
    surface_order: usize,
    xgrid: &Grid,
) -> Result<(f64, f64, f64)>
where
    S: Scene,
    G: Fn(&[f64], f64) -> f64 + Sync,
{
    let d = derived_exact(model, scene, sgrid, surface_order)?;
    let nm1 = (model.n - 1) as i32;
    let ug = &sgrid.ugrid;
    let mut lhs = 0.0;
    for iu in 0..ug.len() {
        let idx = ug.unflat(iu);
        let mut wu = ug.cell_volume();
        for (a, &k) in idx.iter().enumerate() {
            if k == 0 || k == ug.dims[a] - 1 {
                wu *= 0.5;
            }
        }
        let u = ug.point(iu);
        for it in 0..sgrid.nt {
            let t = sgrid.t(it);
            let wt = if it == sgrid.nt - 1 { 0.5 } else { 1.0 } * sgrid.dt;
            lhs += wu * wt * t.powi(nm1) * d.at(iu, it) * gamma(&u, t);
        }
    }

    // rhs: x-grid trapezoid of f(x)·∫ γ(u, ρ(x,u)) du.
    let mut contrib = vec![0.0; xgrid.len()];
    let xg = xgrid.clone();
    let m = *model;
    let ugrid = ug.clone();
    crate::exec::fill_cells(&mut contrib, |i| {
        let x = xg.point(i);
        let fx = scene.eval(&x);
        if fx == 0.0 {
            return 0.0;
        }
        let mut bp = 0.0;
        for iu in 0..ugrid.len() {
            let idx = ugrid.unflat(iu);
            let mut wu = ugrid.cell_volume();
            for (a, &k) in idx.iter().enumerate() {
                if k == 0 || k == ugrid.dims[a] - 1 {
                    wu *= 0.5;
                }
            }
            let u = ugrid.point(iu);
            bp += wu * gamma(&u, m.scaled_dist(&x, &u));
        }
        let xi = xg.unflat(i);
        let mut wx = xg.cell_volume();
        for (a, &k) in xi.iter().enumerate() {
            if k == 0 || k == xg.dims[a] - 1 {
                wx *= 0.5;
            }
        }
        wx * fx * bp
    });
    let rhs: f64 = contrib.iter().sum();
    let gap = if rhs == 0.0 && lhs == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    };
    Ok((lhs, rhs, gap))
}

/// Axis coupling constant of the moment operator: the x₁ axis (scaled by λ
/// in the forward map) carries λ², every other hyperplane axis carries ν².
/// Calibrated against quadrature oracles of ∂ₜR(xᵢf); the acceptance suite
/// re-verifies it.
pub fn kappa(model: &EccentricityModel, axis: usize) -> f64 {
    if axis == 1 {
        model.lambda * model.lambda
    } else {
        model.nu * model.nu
    }
}

/// Moment operator on volume data: D_i R = κᵢ·t·∂_{uᵢ}R + uᵢ·∂ₜR, which
/// reproduces ∂ₜR(xᵢ f).  Finite differences: centered inside, one-sided
/// second-order at the edges.  `axis` is 1-based over the hyperplane axes.
pub fn moment_apply(s: &Sinogram, axis: usize) -> Result<Vec<f64>> {
    if s.kind != DataKind::Volume {
        return Err(Error::Unsupported("moment_apply expects volume data".into()));
    }
    let n = s.model.n;
    if axis == 0 || axis > n - 1 {
        return Err(Error::OutOfDomain(format!(
            "axis {axis} out of range 1..={}",
            n - 1
        )));
    }
    let ug = &s.grid.ugrid;
    let nt = s.grid.nt;
    if nt < 3 || ug.dims[axis - 1] < 3 {
        return Err(Error::InvalidGrid(
            "differentiation needs at least 3 nodes per axis".into(),
        ));
    }
    let k = kappa(&s.model, axis);
    let du = ug.spacing[axis - 1];
    let dt = s.grid.dt;
    // stride between u-neighbors along `axis` in the flat u index
    let stride: usize = ug.dims[axis..].iter().product();
    let m_axis = ug.dims[axis - 1];
    let mut out = vec![0.0; s.values.len()];
    for iu in 0..ug.len() {
        let idx = ug.unflat(iu);
        let ka = idx[axis - 1];
        let u = ug.point(iu);
        for it in 0..nt {
            // ∂R/∂uᵢ
            let dru = if ka == 0 {
                (-3.0 * s.at(iu, it) + 4.0 * s.at(iu + stride, it) - s.at(iu + 2 * stride, it))
                    / (2.0 * du)
            } else if ka == m_axis - 1 {
                (3.0 * s.at(iu, it) - 4.0 * s.at(iu - stride, it) + s.at(iu - 2 * stride, it))
                    / (2.0 * du)
            } else {
                (s.at(iu + stride, it) - s.at(iu - stride, it)) / (2.0 * du)
            };
            // ∂R/∂t
            let drt = if it == 0 {
                (-3.0 * s.at(iu, 0) + 4.0 * s.at(iu, 1) - s.at(iu, 2)) / (2.0 * dt)
            } else if it == nt - 1 {
                (3.0 * s.at(iu, nt - 1) - 4.0 * s.at(iu, nt - 2) + s.at(iu, nt - 3)) / (2.0 * dt)
            } else {
                (s.at(iu, it + 1) - s.at(iu, it - 1)) / (2.0 * dt)
            };
            out[s.grid.flat(iu, it)] = k * s.grid.t(it) * dru + u[axis - 1] * drt;
        }
    }
    Ok(out)
}
