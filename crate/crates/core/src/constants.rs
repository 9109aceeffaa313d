//! Measures of unit balls and spheres.
//!
//! `sphere_area(n)` is the (n-1)-dimensional measure of the unit sphere
//! S^{n-1} in R^n, `ball_volume(n)` the volume of the unit ball in R^n.
//! Both follow the two-step recursion `v(n) = 2*pi/n * v(n-2)`, which is
//! exact up to rounding for every n and avoids evaluating the gamma function.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Volume of the unit ball in R^n (`n >= 0`, with the convention v(0) = 1).
pub fn ball_volume(n: usize) -> f64 {
    let (mut v, start) = if n % 2 == 0 { (1.0, 0) } else { (2.0, 1) };
    let mut k = start;
    while k < n {
        k += 2;
        v *= 2.0 * PI / k as f64;
    }
    v
}

/// Surface measure of the unit sphere S^{n-1} in R^n. For n = 1 this is the
/// counting measure of {-1, 1}, i.e. 2.
pub fn sphere_area(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    n as f64 * ball_volume(n)
}

/// The three dimension-dependent constants that enter the critical masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionConstants {
    pub dimension: usize,
    /// Surface measure of S^{N-1}.
    pub sphere: f64,
    /// Volume of the unit ball in R^N.
    pub ball: f64,
    /// Surface measure of S^{N-2}; equals 2 for N = 2.
    pub sphere_below: f64,
}

impl DimensionConstants {
    pub fn new(dimension: usize) -> Self {
        DimensionConstants {
            dimension,
            sphere: sphere_area(dimension),
            ball: ball_volume(dimension),
            sphere_below: sphere_area(dimension.saturating_sub(1)),
        }
    }

    /// Integral of `(x . nu)_+` over nu in S^{N-1} for |x| = 1.
    ///
    /// Equals `sphere_below / (N - 1)`; the polar-coordinate Jacobian
    /// `sin^{N-2}` is what produces the `1/(N-1)` factor.
    pub fn positive_part_sphere_constant(&self) -> f64 {
        self.sphere_below / (self.dimension as f64 - 1.0)
    }
}
