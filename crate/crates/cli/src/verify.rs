//! Self-checks run by `ndrop verify`, one [`Check`] per row of `verify.csv`.

use crate::config::ExperimentConfig;
use crate::{CliError, Result};
use nonlocal_drop::energy::{background, check_perimeter_decomposition, check_riesz_decomposition, scaling_report, EnergyParams};
use nonlocal_drop::geometry::{Shape, VoxelShape};
use nonlocal_drop::isoperimetry::{isoperimetric_check, random_blob, volume_cap};
use nonlocal_drop::kernels::KernelSpec;
use nonlocal_drop::quadrature::{double_integral, QuadratureSpec};
use nonlocal_drop::slicing::{layer_cake_checks, sphere_positive_integral, sphere_positive_quadrature};
use nonlocal_drop::thresholds::critical_mass;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub const SUITES: [&str; 6] = ["identity", "isoperimetry", "scaling", "sphere", "layer-cake", "golden"];

/// Critical mass for N = 3, s = 1/2, eps = 1/2, A = 0 from a 40-digit evaluation.
pub const CRITICAL_MASS_REFERENCE: f64 = 224.495699389689636;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub id: String,
    pub value: f64,
    pub reference: f64,
    /// Signed quantity compared against `tolerance`.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// `|residual| <= tolerance`.
    fn two_sided(suite: &'static str, id: String, value: f64, reference: f64, tolerance: f64) -> Self {
        let residual = value - reference;
        Check {
            suite,
            id,
            value,
            reference,
            residual,
            tolerance,
            passed: residual.abs() <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub identity_pairs: usize,
    pub identity_grid: usize,
    pub isoperimetry_shapes: usize,
    pub sphere_points: usize,
    pub layer_points: usize,
    pub golden_pairs: usize,
    pub budget: usize,
    pub seed: u64,
}

impl From<&ExperimentConfig> for VerifyOptions {
    fn from(c: &ExperimentConfig) -> Self {
        VerifyOptions {
            identity_pairs: c.identity_pairs,
            identity_grid: c.identity_grid,
            isoperimetry_shapes: c.isoperimetry_shapes,
            sphere_points: c.sphere_points,
            layer_points: c.layer_points,
            golden_pairs: c.golden_pairs,
            budget: c.budget,
            seed: c.seed,
        }
    }
}

impl VerifyOptions {
    fn mc(&self, offset: u64) -> QuadratureSpec {
        QuadratureSpec::monte_carlo(self.budget, self.seed.wrapping_add(offset))
    }
}

fn frac2() -> Result<KernelSpec> {
    Ok(KernelSpec::fractional(2, 0.5, 0.8)?)
}

/// Two random discs on a `grid x grid` lattice over `[-1, 1]^2`; the second
/// loses the cells of the first.
pub fn disjoint_voxel_pair(grid: usize, rng: &mut ChaCha8Rng) -> Result<(Shape, Shape)> {
    let h = 2.0 / grid as f64;
    loop {
        let mut disc = || {
            let c = [rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)];
            (c, rng.random_range(0.2..0.5))
        };
        let (d1, d2) = (disc(), disc());
        let inside = |(c, r): ([f64; 2], f64), x: &[f64]| (x[0] - c[0]).hypot(x[1] - c[1]) < r;
        let u = VoxelShape::from_fn(2, &[grid, grid], &[-1.0, -1.0], h, |x| inside(d1, x))?;
        let w = VoxelShape::from_fn(2, &[grid, grid], &[-1.0, -1.0], h, |x| inside(d2, x) && !inside(d1, x))?;
        if u.occupied() > 0 && w.occupied() > 0 {
            return Ok((Shape::Voxels(u), Shape::Voxels(w)));
        }
    }
}

pub fn identity(o: &VerifyOptions) -> Result<Vec<Check>> {
    let k = frac2()?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let mut out = Vec::new();
    for i in 0..o.identity_pairs {
        let (u, w) = disjoint_voxel_pair(o.identity_grid, &mut rng)?;
        let spec = o.mc(i as u64);
        let p = check_perimeter_decomposition(&u, &w, &k, &spec)?;
        out.push(Check::two_sided("identity", format!("perimeter-{i}"), p.residual, 0.0, 3.0 * p.combined_error));
        let r = check_riesz_decomposition(&u, &w, &spec)?;
        out.push(Check::two_sided("identity", format!("riesz-{i}"), r.residual, 0.0, 3.0 * r.combined_error));
    }
    Ok(out)
}

pub fn isoperimetry(o: &VerifyOptions) -> Result<Vec<Check>> {
    let k = frac2()?;
    let cap = volume_cap(&k);
    let mut out = Vec::new();
    for i in 0..o.isoperimetry_shapes {
        let seed = o.seed.wrapping_add(i as u64);
        let blob = Shape::Voxels(random_blob(2, cap, 0.05, seed)?);
        let c = isoperimetric_check(&format!("blob-{seed}"), &blob, &k, &o.mc(i as u64))?;
        let tolerance = 3.0 * c.perimeter_error;
        out.push(Check {
            suite: "isoperimetry",
            id: c.id,
            value: c.perimeter,
            reference: c.bound,
            residual: c.slack,
            tolerance,
            passed: c.slack >= -tolerance,
        });
    }
    Ok(out)
}

/// Exponents of a voxel blob under `E -> 2E` at the configured budget and four times it.
pub fn scaling(o: &VerifyOptions) -> Result<Vec<Check>> {
    let params = EnergyParams::new(frac2()?, 1.0)?;
    let blob = Shape::Voxels(random_blob(2, volume_cap(&params.kernel), 0.05, o.seed)?);
    let mut out = Vec::new();
    for (label, budget) in [("coarse", o.budget), ("refined", 4 * o.budget)] {
        let spec = QuadratureSpec::monte_carlo(budget, o.seed);
        let r = scaling_report(&blob, 2.0, &params, &spec)?;
        for (name, t) in [("perimeter", &r.perimeter), ("riesz", &r.riesz), ("background", &r.background)] {
            let e = t.exponent.unwrap_or(f64::NAN);
            out.push(Check::two_sided("scaling", format!("{name}-{label}"), e, t.expected, 0.02 * t.expected));
        }
    }
    Ok(out)
}

pub fn sphere(o: &VerifyOptions) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let spec = QuadratureSpec::tensor(1 << 16);
    let mut out = Vec::new();
    for i in 0..o.sphere_points {
        let n = 2 + i % 2;
        let x: Vec<f64> = loop {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            if x.iter().map(|v| v * v).sum::<f64>() > 1e-2 {
                break x;
            }
        };
        let exact = sphere_positive_integral(&x)?;
        let q = sphere_positive_quadrature(&x, &spec)?;
        out.push(Check::two_sided("sphere", format!("n{n}-{i}"), q.value, exact, 1e-3 * exact));
    }
    Ok(out)
}

/// Both identities at `points` and `2 points - 1` offsets. The refined
/// residual must not exceed the coarse one unless it already lies inside its
/// own error bar.
pub fn layer_cake(o: &VerifyOptions) -> Result<Vec<Check>> {
    let e = Shape::Voxels(random_blob(2, volume_cap(&frac2()?), 0.05, o.seed)?);
    let spec = o.mc(0);
    let coarse_points = o.layer_points.max(5) | 1;
    let mut out = Vec::new();
    for (j, nu) in [[1.0, 0.0], [0.6, -0.8]].iter().enumerate() {
        let coarse = layer_cake_checks(&e, nu, coarse_points, 1.0, &spec)?;
        let fine = layer_cake_checks(&e, nu, 2 * coarse_points - 1, 1.0, &spec)?;
        for (name, c, f) in [("background", &coarse.background, &fine.background), ("cross", &coarse.cross, &fine.cross)] {
            for (label, id) in [("coarse", c), ("fine", f)] {
                out.push(Check::two_sided("layer-cake", format!("{name}-{j}-{label}"), id.layered, id.direct, 3.0 * id.error));
            }
            out.push(Check {
                suite: "layer-cake",
                id: format!("{name}-{j}-refinement"),
                value: f.residual.abs(),
                reference: c.residual.abs(),
                residual: f.residual.abs() - c.residual.abs(),
                tolerance: f.error,
                passed: f.residual.abs() <= c.residual.abs() || f.residual.abs() <= f.error,
            });
        }
    }
    Ok(out)
}

/// `m_c`, `R(B_1)` for N = 2, 3 and the Monte Carlo `V_1(B_1)` for N = 3.
pub fn golden(o: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let m = critical_mass(3, 0.5, 0.5, 0.0)?.mass;
    out.push(Check::two_sided("golden", "critical-mass".into(), m, CRITICAL_MASS_REFERENCE, 0.01));
    for n in [2, 3] {
        let b = Shape::ball(&vec![0.0; n], 1.0)?;
        let r = background(&b, 1.0, &o.mc(0).sampled_only())?;
        out.push(Check::two_sided("golden", format!("background-n{n}"), r.value, 2.0 * PI, 0.005 * 2.0 * PI));
    }
    let b = Shape::ball(&[0.0; 3], 1.0)?;
    let spec = QuadratureSpec::monte_carlo(o.golden_pairs, o.seed);
    let v = double_integral(&b, &b, |x, y| {
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt();
        if d > 0.0 { 0.5 / d } else { 0.0 }
    }, &spec)?;
    let exact = 16.0 * PI * PI / 15.0;
    out.push(Check::two_sided("golden", "riesz-n3".into(), v.value, exact, 0.01 * exact));
    Ok(out)
}

pub fn run_suite(name: &str, o: &VerifyOptions) -> Result<Vec<Check>> {
    match name {
        "identity" => identity(o),
        "isoperimetry" => isoperimetry(o),
        "scaling" => scaling(o),
        "sphere" => sphere(o),
        "layer-cake" => layer_cake(o),
        "golden" => golden(o),
        other => Err(CliError::Config(format!("unknown verify suite `{other}` (known: {})", SUITES.join(", ")))),
    }
}
