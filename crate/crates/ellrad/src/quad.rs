//! Quadrature rules: Gauss–Legendre line rules and product rules on the
//! unit disk, ball, circle, and sphere.
//!
//! The surface and volume rules use Gauss–Legendre in the radial / polar
//! directions and uniform midpoint nodes in the angular direction.  The
//! angular nodes are generated in mirror pairs (θ, −θ) so that integrands
//! odd in the last Cartesian coordinate cancel pairwise to rounding error —
//! that symmetry carries through the forward map and annihilates fields odd
//! in xₙ.  Angular counts must therefore be even.

/// Evaluate the Legendre polynomial P_q and its derivative at x by the
/// three-term recurrence.
fn legendre_pd(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes (ascending) and weights on [−1, 1], by Newton
/// iteration on the Legendre recurrence.  Exact for polynomials of degree
/// ≤ 2q−1.
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1, "need at least one node");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root from the right.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_pd(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        if q % 2 == 1 && i == m - 1 {
            x = 0.0; // the central root of an odd-degree P_q is exact
        }
        let (_, dp) = legendre_pd(q, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    (nodes, weights)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gl_on(a: f64, b: f64, q: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(q);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Composite Gauss–Legendre: q nodes on each of `panels` equal subintervals
/// of [a, b].
pub fn composite_gl(a: f64, b: f64, panels: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1);
    let mut nodes = Vec::with_capacity(panels * q);
    let mut weights = Vec::with_capacity(panels * q);
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let (xs, ws) = gl_on(a + p as f64 * h, a + (p + 1) as f64 * h, q);
        nodes.extend(xs);
        weights.extend(ws);
    }
    (nodes, weights)
}

/// A quadrature rule in `dim` dimensions: flattened points and weights.
#[derive(Debug, Clone)]
pub struct Rule {
    pub dim: usize,
    /// Node coordinates, node-major: pts[i*dim..(i+1)*dim].
    pub pts: Vec<f64>,
    pub wts: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.wts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wts.is_empty()
    }

    pub fn pt(&self, i: usize) -> &[f64] {
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    /// Σ wᵢ f(pᵢ), summed sequentially in node order for determinism.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.wts[i] * f(self.pt(i));
        }
        acc
    }
}

fn check_even(count: usize, what: &str) {
    assert!(
        count >= 2 && count % 2 == 0,
        "{what} node count must be even and >= 2, got {count}"
    );
}

/// Midpoint angles on the upper half circle, returned as (cos, sin) with
/// each entry standing for the mirror pair ±θ.
fn half_circle_angles(na: usize) -> Vec<(f64, f64)> {
    check_even(na, "angular");
    let h = 2.0 * std::f64::consts::PI / na as f64;
    (0..na / 2)
        .map(|j| {
            let th = (j as f64 + 0.5) * h;
            (th.cos(), th.sin())
        })
        .collect()
}

/// Product rule on the closed unit disk: `qr` Gauss–Legendre radial nodes
/// (weighted by r) × `na` uniform midpoint angles.  Exact for the angular
/// part of trigonometric polynomials of degree < na.
pub fn unit_disk(qr: usize, na: usize) -> Rule {
    let (rs, wr) = gl_on(0.0, 1.0, qr);
    let angles = half_circle_angles(na);
    let wa = 2.0 * std::f64::consts::PI / na as f64;
    let mut pts = Vec::with_capacity(qr * na * 2);
    let mut wts = Vec::with_capacity(qr * na);
    for (r, wr) in rs.iter().zip(&wr) {
        for (c, s) in &angles {
            let w = r * wr * wa;
            pts.extend_from_slice(&[r * c, r * s]);
            wts.push(w);
            pts.extend_from_slice(&[r * c, -(r * s)]);
            wts.push(w);
        }
    }
    Rule { dim: 2, pts, wts }
}

/// Product rule on the closed unit ball in ℝ³: radial Gauss–Legendre
/// (weight r²) × Gauss–Legendre in cos of the polar angle measured from the
/// y₁ axis × uniform midpoint azimuth in the (y₂, y₃) plane.
pub fn unit_ball3(qr: usize, npol: usize, naz: usize) -> Rule {
    let (rs, wr) = gl_on(0.0, 1.0, qr);
    let (cs, wc) = gauss_legendre(npol);
    let az = half_circle_angles(naz);
    let wa = 2.0 * std::f64::consts::PI / naz as f64;
    let mut pts = Vec::with_capacity(qr * npol * naz * 3);
    let mut wts = Vec::with_capacity(qr * npol * naz);
    for (r, wr) in rs.iter().zip(&wr) {
        for (c, wc) in cs.iter().zip(&wc) {
            let s = (1.0 - c * c).sqrt();
            let w = r * r * wr * wc * wa;
            for (ca, sa) in &az {
                pts.extend_from_slice(&[r * c, r * s * ca, r * s * sa]);
                wts.push(w);
                pts.extend_from_slice(&[r * c, r * s * ca, -(r * s * sa)]);
                wts.push(w);
            }
        }
    }
    Rule { dim: 3, pts, wts }
}

/// Uniform midpoint rule on the unit circle (surface measure, total 2π).
pub fn unit_circle(na: usize) -> Rule {
    let angles = half_circle_angles(na);
    let wa = 2.0 * std::f64::consts::PI / na as f64;
    let mut pts = Vec::with_capacity(na * 2);
    let mut wts = Vec::with_capacity(na);
    for (c, s) in &angles {
        pts.extend_from_slice(&[*c, *s]);
        wts.push(wa);
        pts.extend_from_slice(&[*c, -*s]);
        wts.push(wa);
    }
    Rule { dim: 2, pts, wts }
}

/// Product rule on the unit sphere in ℝ³ (surface measure, total 4π):
/// Gauss–Legendre in cos of the polar angle from the y₁ axis × uniform
/// midpoint azimuth.
pub fn unit_sphere(npol: usize, naz: usize) -> Rule {
    let (cs, wc) = gauss_legendre(npol);
    let az = half_circle_angles(naz);
    let wa = 2.0 * std::f64::consts::PI / naz as f64;
    let mut pts = Vec::with_capacity(npol * naz * 3);
    let mut wts = Vec::with_capacity(npol * naz);
    for (c, wc) in cs.iter().zip(&wc) {
        let s = (1.0 - c * c).sqrt();
        let w = wc * wa;
        for (ca, sa) in &az {
            pts.extend_from_slice(&[*c, s * ca, s * sa]);
            wts.push(w);
            pts.extend_from_slice(&[*c, s * ca, -(s * sa)]);
            wts.push(w);
        }
    }
    Rule { dim: 3, pts, wts }
}
