//! Bessel functions of the orders the Hankel transforms need: `J₀` for the
//! planar case and the closed-form half-integer orders for the spatial case.
//!
//! `J₀` uses three branches: the ascending series below `x = 8`, a midpoint
//! rule on the integral representation `(1/π)∫₀^π cos(x sin θ)dθ` up to
//! `x = 25`, and the large-argument expansion beyond.  The plain asymptotic
//! series cannot reach 1e−12 at `x = 8` (it bottoms out near 1e−4 there), so
//! the integral branch bridges the gap; each branch stays below 1e−13 absolute
//! error on its interval.

use crate::error::{Error, Result};

/// Orders supported by [`bessel_j`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    PlusHalf,
    MinusHalf,
}

/// `J_ν(x)` for `ν ∈ {0, ±1/2}` and `x ≥ 0`.
///
/// `J_{−1/2}` diverges at the origin; `x = 0` returns `+∞` there.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::OutOfDomain(format!("Bessel argument {x} must be ≥ 0")));
    }
    let val = match order {
        BesselOrder::Zero => j0(x),
        BesselOrder::PlusHalf => {
            if x == 0.0 {
                0.0
            } else {
                (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sin()
            }
        }
        BesselOrder::MinusHalf => {
            if x == 0.0 {
                f64::INFINITY
            } else {
                (2.0 / (std::f64::consts::PI * x)).sqrt() * x.cos()
            }
        }
    };
    Ok(val)
}

/// `J₀(x)` for `x ≥ 0` (negative arguments use evenness).
pub fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 8.0 {
        j0_series(x)
    } else if x < 25.0 {
        j0_integral(x)
    } else {
        j0_asymptotic(x)
    }
}

fn j0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        term *= -q / ((k * k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Midpoint rule on `(1/π)∫₀^π cos(x sin θ)dθ`; the integrand extends to a
/// smooth 2π-periodic function, so 64 nodes are spectrally accurate for
/// `x < 25` (the aliasing term behaves like `J₁₂₈(x)`).
fn j0_integral(x: f64) -> f64 {
    const M: usize = 64;
    let h = std::f64::consts::PI / M as f64;
    let mut sum = 0.0;
    for j in 0..M {
        let theta = (j as f64 + 0.5) * h;
        sum += (x * theta.sin()).cos();
    }
    sum / M as f64
}

/// Hankel large-argument expansion
/// `J₀(x) = √(2/(πx)) [P(x)cos(x−π/4) − Q(x)sin(x−π/4)]` with the
/// coefficients `a_m = (−1)^m [(2m−1)!!]² / (m!·8^m)`; truncated where the
/// next term is below 1e−13 for `x ≥ 25`.
fn j0_asymptotic(x: f64) -> f64 {
    // (−1)^k a_{2k}:  1, 9/128, 3675/32768, 2401245/4194304, …
    const P: [f64; 6] = [
        1.0,
        -9.0 / 128.0,
        3675.0 / 32768.0,
        -2401245.0 / 4194304.0,
        4108830350625.0 / 676457349120.0,
        -428644356821255625.0 / 3896362189160448.0,
    ];
    // (−1)^k a_{2k+1}:  −1/8, 75/1024, −59535/262144, …
    const Q: [f64; 5] = [
        -1.0 / 8.0,
        75.0 / 1024.0,
        -59535.0 / 262144.0,
        57972915.0 / 33554432.0,
        -1187452057550625.0 / 48704929136640.0,
    ];
    let z = 1.0 / (x * x);
    let mut p = 0.0;
    for &c in P.iter().rev() {
        p = p * z + c;
    }
    let mut q = 0.0;
    for &c in Q.iter().rev() {
        q = q * z + c;
    }
    q /= x;
    let chi = x - std::f64::consts::FRAC_PI_4;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with 50-digit arithmetic, spanning all three
    // branches and both seams.
    const J0_REFERENCE: [(f64, f64); 23] = [
        (0.0, 1.0),
        (0.5, 0.938469807240812904),
        (1.0, 0.765197686557966551),
        (2.0, 0.223890779141235668),
        (2.404825557695773, -1.2e-16),
        (3.0, -0.260051954901933438),
        (5.0, -0.177596771314338304),
        (7.5, 0.266339657880378397),
        (7.999, 0.171885372282320368),
        (8.0, 0.171650807137553906),
        (8.001, 0.171416099671532638),
        (10.0, -0.245935764451348335),
        (12.5, 0.146884054700421102),
        (15.0, -0.0142244728267807732),
        (19.9, 0.172877756392618391),
        (20.0, 0.167024664340583155),
        (20.1, 0.159536067937297208),
        (25.0, 0.0962667832759581162),
        (40.0, 0.00736689058423728955),
        (60.0, -0.0914718040890618695),
        (100.0, 0.0199858503042231224),
        (250.0, -0.0260533734252042337),
        (700.0, -0.00628827246506876676),
    ];

    #[test]
    fn j0_matches_reference_table() {
        for &(x, expected) in &J0_REFERENCE {
            let got = j0(x);
            assert!(
                (got - expected).abs() <= 1e-12,
                "J0({x}): got {got:.15e}, expected {expected:.15e}"
            );
        }
    }

    #[test]
    fn j0_first_zero() {
        assert!(j0(2.404825557695773).abs() <= 1e-10);
    }

    #[test]
    fn branch_seams_are_continuous() {
        // The series/integral seam is covered by the table (7.999 / 8.001);
        // check the integral/asymptotic seam by evaluating both at x = 25.
        let gap = (j0_integral(25.0) - j0_asymptotic(25.0)).abs();
        assert!(gap < 1e-13, "seam mismatch {gap:.2e}");
    }

    #[test]
    fn half_integer_orders_are_closed_forms() {
        let x = 1.7;
        let scale = (2.0 / (std::f64::consts::PI * x)).sqrt();
        assert_eq!(bessel_j(BesselOrder::PlusHalf, x).unwrap(), scale * x.sin());
        assert_eq!(bessel_j(BesselOrder::MinusHalf, x).unwrap(), scale * x.cos());
        assert!(bessel_j(BesselOrder::PlusHalf, std::f64::consts::PI).unwrap().abs() < 1e-15);
        assert_eq!(bessel_j(BesselOrder::PlusHalf, 0.0).unwrap(), 0.0);
        assert!(bessel_j(BesselOrder::MinusHalf, 0.0).unwrap().is_infinite());
        assert!(bessel_j(BesselOrder::Zero, -1.0).is_err());
    }

    #[test]
    fn j0_even_extension() {
        assert_eq!(j0(-3.0), j0(3.0));
    }
}
