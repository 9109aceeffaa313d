//! The small-volume lower bound `P_K(F) >= C |F|^{(N-s)/N}`.

use crate::constants::{ball_volume, sphere_area};
use crate::energy::kernel_perimeter;
use crate::error::{Error, Result};
use crate::geometry::{Shape, VoxelShape};
use crate::kernels::KernelSpec;
use crate::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetryCheck {
    pub id: String,
    pub volume: f64,
    /// `omega_N (1 + eps)^N`.
    pub cap: f64,
    pub constant: f64,
    pub bound: f64,
    pub perimeter: f64,
    pub perimeter_error: f64,
    /// `perimeter - bound`.
    pub slack: f64,
}

/// `C = |S^{N-1}| |B_1|^{s/N} / (lambda s)`.
pub fn isoperimetric_constant(kernel: &KernelSpec) -> f64 {
    let n = kernel.dimension();
    sphere_area(n) * ball_volume(n).powf(kernel.s() / n as f64) / (kernel.lambda() * kernel.s())
}

/// Largest volume covered by the bound.
pub fn volume_cap(kernel: &KernelSpec) -> f64 {
    let n = kernel.dimension();
    ball_volume(n) * (1.0 + kernel.epsilon()).powi(n as i32)
}

pub fn isoperimetric_check(id: &str, f: &Shape, kernel: &KernelSpec, spec: &QuadratureSpec) -> Result<IsoperimetryCheck> {
    let volume = f.volume()?;
    let cap = volume_cap(kernel);
    if volume > cap {
        return Err(Error::Precondition(format!("volume {volume} exceeds the cap {cap}")));
    }
    let constant = isoperimetric_constant(kernel);
    let n = kernel.dimension() as f64;
    let bound = constant * volume.powf((n - kernel.s()) / n);
    let p = kernel_perimeter(f, kernel, spec)?;
    Ok(IsoperimetryCheck {
        id: id.to_string(),
        volume,
        cap,
        constant,
        bound,
        perimeter: p.value,
        perimeter_error: p.error,
        slack: p.value - bound,
    })
}

/// Seeded union of one to five random balls, voxelised at `spacing`, rescaled
/// so that its volume stays below `cap`.
pub fn random_blob(dim: usize, cap: f64, spacing_fraction: f64, seed: u64) -> Result<VoxelShape> {
    crate::geometry::check_dimension(dim)?;
    if !(cap > 0.0) || !(spacing_fraction > 0.0 && spacing_fraction < 1.0) {
        return Err(Error::param("blob", "need cap > 0 and spacing fraction in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_cap = (cap / ball_volume(dim)).powf(1.0 / dim as f64);
    let k = rng.random_range(1..=5usize);
    let mut balls = Vec::with_capacity(k);
    for _ in 0..k {
        let c: Vec<f64> = (0..dim).map(|_| r_cap * (rng.random::<f64>() - 0.5)).collect();
        balls.push((c, r_cap * (0.15 + 0.35 * rng.random::<f64>())));
    }
    let total: f64 = balls.iter().map(|b| ball_volume(dim) * b.1.powi(dim as i32)).sum();
    // the union is no larger than the sum of the parts
    let shrink = if total > 0.9 * cap { (0.9 * cap / total).powf(1.0 / dim as f64) } else { 1.0 };
    let shape = Shape::union(
        balls
            .into_iter()
            .map(|(c, r)| {
                let c: Vec<f64> = c.iter().map(|x| x * shrink).collect();
                Shape::ball(&c, r * shrink)
            })
            .collect::<Result<Vec<_>>>()?,
    )?;
    let v = VoxelShape::voxelize(&shape, spacing_fraction * r_cap)?;
    if v.volume() > cap {
        return Err(Error::Precondition(format!("voxelised blob volume {} exceeds the cap {cap}", v.volume())));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn frac(n: usize, lambda: f64) -> KernelSpec {
        KernelSpec::fractional(n, 0.5, if n == 2 { 0.8 } else { 0.5 }).unwrap().with_lambda(lambda).unwrap()
    }

    #[test]
    fn constant_values_and_monotonicity() {
        // N = 2, s = 1/2, lambda = 1: 2 pi sqrt(pi)^{1/2} / (1/2)
        let c = isoperimetric_constant(&frac(2, 1.0));
        assert!((c - 4.0 * PI * PI.powf(0.25)).abs() < 1e-12);
        let cs: Vec<f64> = [1.0, 2.0, 5.0].iter().map(|&l| isoperimetric_constant(&frac(2, l))).collect();
        assert!(cs[0] > cs[1] && cs[1] > cs[2]);
        assert!((volume_cap(&frac(3, 1.0)) - 4.0 * PI / 3.0 * 3.375).abs() < 1e-12);
    }

    #[test]
    fn empty_and_capped_shapes() {
        let spec = QuadratureSpec::default();
        let k = frac(2, 1.0);
        let e = isoperimetric_check("empty", &Shape::empty(2), &k, &spec).unwrap();
        assert_eq!((e.bound, e.perimeter, e.slack), (0.0, 0.0, 0.0));
        let b = Shape::ball(&[0.0, 0.0], 1.8).unwrap();
        let r = isoperimetric_check("cap", &b, &k, &spec).unwrap();
        assert!(r.slack >= -3.0 * r.perimeter_error, "{r:?}");
        let over = Shape::ball(&[0.0, 0.0], 1.9).unwrap();
        assert!(matches!(isoperimetric_check("over", &over, &k, &spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn blobs_are_seeded_and_capped() {
        let k = frac(2, 1.0);
        let a = random_blob(2, volume_cap(&k), 0.05, 3).unwrap();
        let b = random_blob(2, volume_cap(&k), 0.05, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.volume() <= volume_cap(&k) && a.occupied() > 0);
        let r = isoperimetric_check("blob", &Shape::Voxels(a), &k, &QuadratureSpec::monte_carlo(20_000, 1)).unwrap();
        assert!(r.slack >= -3.0 * r.perimeter_error, "{r:?}");
    }

    #[test]
    fn slack_sign_survives_rescaling() {
        let k = frac(2, 1.0);
        let b = Shape::ball(&[0.3, 0.0], 0.5).unwrap();
        let spec = QuadratureSpec::default();
        let r1 = isoperimetric_check("a", &b, &k, &spec).unwrap();
        let (b2, _) = b.scale(2.0).unwrap();
        let r2 = isoperimetric_check("b", &b2, &k, &spec).unwrap();
        assert_eq!(r1.slack > 0.0, r2.slack > 0.0);
        assert!((r2.slack / r1.slack - 2f64.powf(1.5)).abs() < 1e-9);
    }
}
