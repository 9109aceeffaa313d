//! Volumes of shapes cut by halfspaces.

use super::{dot, BallConfig, Halfspace, Line, Shape, VoxelShape};
use crate::constants::ball_volume;
use crate::error::Result;

pub(super) fn clipped_volume(base: &Shape, cuts: &[Halfspace]) -> Result<f64> {
    match (base, cuts) {
        (_, []) => base.volume(),
        (Shape::Balls(b), [h]) => balls_cut(b, h),
        (Shape::Voxels(v), [h]) => Ok(voxels_cut(v, h)),
        (Shape::Union(parts), _) => parts.iter().map(|p| clipped_volume(p, cuts)).sum(),
        (Shape::Clipped { base: inner, cuts: more }, _) => {
            let mut all = more.clone();
            all.extend_from_slice(cuts);
            clipped_volume(inner, &all)
        }
        _ => {
            base.volume()?;
            Ok(numeric_volume(&Shape::Clipped {
                base: Box::new(base.clone()),
                cuts: cuts.to_vec(),
            }))
        }
    }
}

/// `int_0^phi sin^n`.
fn sin_power_integral(n: usize, phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    match n {
        0 => phi,
        1 => 1.0 - c,
        _ => -s.powi(n as i32 - 1) * c / n as f64 + (n as f64 - 1.0) / n as f64 * sin_power_integral(n - 2, phi),
    }
}

/// Volume of `{x in B_r(c) : x . nu >= l}` in R^n, with `h = l - c . nu`.
pub(crate) fn cap_volume(n: usize, r: f64, h: f64) -> f64 {
    if h >= r {
        return 0.0;
    }
    if h <= -r {
        return ball_volume(n) * r.powi(n as i32);
    }
    let phi = (h / r).acos();
    ball_volume(n - 1) * r.powi(n as i32) * sin_power_integral(n, phi)
}

fn balls_cut(b: &BallConfig, h: &Halfspace) -> Result<f64> {
    b.volume()?;
    let nu = h.normal();
    Ok(b.balls()
        .iter()
        .map(|ball| cap_volume(b.dimension(), ball.radius, h.offset() - dot(&ball.center, &nu)))
        .sum())
}

/// Area of `{(x, y) in [x0,x1] x [y0,y1] : a x + b y >= l}`.
fn rect_area(x0: f64, x1: f64, y0: f64, y1: f64, a: f64, b: f64, l: f64) -> f64 {
    let len = |x: f64| -> f64 {
        let rhs = l - a * x;
        if b.abs() < 1e-300 {
            return if rhs <= 0.0 { y1 - y0 } else { 0.0 };
        }
        let y = rhs / b;
        if b > 0.0 {
            (y1 - y.max(y0)).clamp(0.0, y1 - y0)
        } else {
            (y.min(y1) - y0).clamp(0.0, y1 - y0)
        }
    };
    let mut cuts = vec![x0, x1];
    if a.abs() > 1e-300 {
        for y in [y0, y1] {
            let x = (l - b * y) / a;
            if x > x0 && x < x1 {
                cuts.push(x);
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    // the integrand is linear between breakpoints, so the midpoint rule is exact
    cuts.windows(2).map(|w| (w[1] - w[0]) * len(0.5 * (w[0] + w[1]))).sum()
}

/// Volume of an axis-aligned cell of side `h` at `lo` inside `{x . nu >= l}`.
fn cell_cut(dim: usize, lo: &[f64; 3], h: f64, nu: &[f64; 3], l: f64) -> f64 {
    if dim == 2 {
        return rect_area(lo[0], lo[0] + h, lo[1], lo[1] + h, nu[0], nu[1], l);
    }
    let (z0, z1) = (lo[2], lo[2] + h);
    let area = |z: f64| rect_area(lo[0], lo[0] + h, lo[1], lo[1] + h, nu[0], nu[1], l - nu[2] * z);
    let mut cuts = vec![z0, z1];
    if nu[2].abs() > 1e-300 {
        for x in [lo[0], lo[0] + h] {
            for y in [lo[1], lo[1] + h] {
                let z = (l - nu[0] * x - nu[1] * y) / nu[2];
                if z > z0 && z < z1 {
                    cuts.push(z);
                }
            }
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    // piecewise quadratic in z: two-point Gauss is exact on every piece
    let g = 0.5 / 3f64.sqrt();
    cuts.windows(2)
        .map(|w| {
            let (m, d) = (0.5 * (w[0] + w[1]), w[1] - w[0]);
            0.5 * d * (area(m - g * d) + area(m + g * d))
        })
        .sum()
}

fn voxels_cut(v: &VoxelShape, h: &Halfspace) -> f64 {
    let nu = h.normal();
    let hs = v.spacing();
    let full = v.cell_volume();
    let reach = 0.5 * hs * nu.iter().map(|x| x.abs()).sum::<f64>();
    v.occupied_indices()
        .map(|idx| {
            let c = dot(&v.cell_center(idx), &nu) - h.offset();
            if c >= reach {
                full
            } else if c <= -reach {
                0.0
            } else {
                cell_cut(v.dimension(), &v.cell_lo(idx), hs, &nu, h.offset())
            }
        })
        .sum()
}

/// Chord-length integration along the last axis on a midpoint grid.
fn numeric_volume(shape: &Shape) -> f64 {
    let bb = shape.bounding_box();
    if bb.is_empty() {
        return 0.0;
    }
    let dim = shape.dimension();
    let axis = dim - 1;
    let mut dir = [0.0; 3];
    dir[axis] = 1.0;
    let n: usize = if dim == 2 { 4096 } else { 512 };
    let w0 = (bb.hi[0] - bb.lo[0]) / n as f64;
    let mut total = 0.0;
    if dim == 2 {
        for i in 0..n {
            let x = bb.lo[0] + (i as f64 + 0.5) * w0;
            let line = Line { point: [x, 0.0, 0.0], dir };
            total += shape.line_intervals(&line).iter().map(|(a, b)| b - a).sum::<f64>() * w0;
        }
    } else {
        let w1 = (bb.hi[1] - bb.lo[1]) / n as f64;
        for i in 0..n {
            for j in 0..n {
                let x = bb.lo[0] + (i as f64 + 0.5) * w0;
                let y = bb.lo[1] + (j as f64 + 0.5) * w1;
                let line = Line { point: [x, y, 0.0], dir };
                total += shape.line_intervals(&line).iter().map(|(a, b)| b - a).sum::<f64>() * w0 * w1;
            }
        }
    }
    total
}
