//! One-dimensional reductions for single balls.
//!
//! Lines at distance `rho` from the center of `B_r` cut a chord of length
//! `2 sqrt(r^2 - rho^2)`; integrating a chord functional over all lines and
//! substituting `rho = r sin(phi)` leaves a smooth integral over
//! `phi in (0, pi/2)`.

use crate::constants::sphere_area;
use crate::error::{Error, Result};
use crate::quadrature::one_d::{tanh_sinh, Quad1d};
use crate::quadrature::pair::power_integral;
use std::f64::consts::PI;

const REL_TOL: f64 = 1e-13;

/// `int_{lines} phi(chord)` over all lines meeting `B_r` in R^n.
pub(crate) fn chord_integral<F: Fn(f64) -> f64>(n: usize, r: f64, phi: F) -> Quad1d {
    let k = 0.5 * sphere_area(n) * sphere_area(n - 1);
    let q = tanh_sinh(
        |a| {
            let (s, c) = a.sin_cos();
            (r * s).powi(n as i32 - 2) * phi(2.0 * r * c) * r * c
        },
        0.0,
        0.5 * PI,
        REL_TOL,
    );
    Quad1d {
        value: k * q.value,
        error: k * q.error,
        evaluations: q.evaluations,
    }
}

/// `int_{B_r(c)} |x|^{-beta} dx` with `d = |c|`.
pub(crate) fn ball_background(n: usize, d: f64, r: f64, beta: f64) -> Result<Quad1d> {
    let e = n as f64 - 1.0 - beta;
    if beta >= n as f64 && d <= r {
        return Err(Error::NonIntegrable(format!(
            "|x|^-{beta} is not integrable on a ball containing the origin in R^{n}"
        )));
    }
    if d == 0.0 {
        return Ok(Quad1d {
            value: sphere_area(n) * r.powf(n as f64 - beta) / (n as f64 - beta),
            error: 0.0,
            evaluations: 0,
        });
    }
    // directions at angle psi from the center direction
    let g = |psi: f64| -> f64 {
        let (s, c) = psi.sin_cos();
        let disc = r * r - d * d * s * s;
        if disc <= 0.0 {
            return 0.0;
        }
        let root = disc.sqrt();
        let (lo, hi) = (d * c - root, d * c + root);
        if hi <= 0.0 {
            return 0.0;
        }
        power_integral(e, lo.max(0.0), hi)
    };
    let psi_max = if d > r { (r / d).asin() } else { PI };
    let q = if n == 2 {
        let q = tanh_sinh(g, 0.0, psi_max, REL_TOL);
        Quad1d { value: 2.0 * q.value, error: 2.0 * q.error, ..q }
    } else {
        let q = tanh_sinh(|p| p.sin() * g(p), 0.0, psi_max, REL_TOL);
        let k = sphere_area(n - 1);
        Quad1d { value: k * q.value, error: k * q.error, ..q }
    };
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ball_volume;

    #[test]
    fn chord_lengths_give_volume() {
        for n in [2usize, 3] {
            let q = chord_integral(n, 1.7, |l| l);
            let exact = 0.5 * sphere_area(n) * ball_volume(n) * 1.7f64.powi(n as i32);
            assert!((q.value - exact).abs() < 1e-12 * exact, "{n}: {q:?}");
        }
    }

    #[test]
    fn centered_and_shifted_background() {
        // R(B_1) = 2 pi for beta = 1 in both dimensions
        for n in [2usize, 3] {
            let q = ball_background(n, 0.0, 1.0, 1.0).unwrap();
            assert!((q.value - 2.0 * PI).abs() < 1e-14);
        }
        // a tiny shift agrees with the centered value
        let a = ball_background(3, 1e-9, 1.0, 1.0).unwrap().value;
        assert!((a - 2.0 * PI).abs() < 1e-8);
        // far ball: close to |B| / d
        let far = ball_background(3, 100.0, 1.0, 1.0).unwrap().value;
        assert!((far - 4.0 * PI / 3.0 / 100.0).abs() < 1e-10, "{far}");
        // Newton: for N = 3, beta = 1 the exterior value is exactly |B| / d
        let ext = ball_background(3, 2.5, 1.0, 1.0).unwrap().value;
        assert!((ext - 4.0 * PI / 3.0 / 2.5).abs() < 1e-11, "{ext}");
    }

    #[test]
    fn singular_background() {
        assert!(ball_background(2, 0.5, 1.0, 2.5).is_err());
        assert!(ball_background(2, 3.0, 1.0, 2.5).is_ok());
    }
}
