//! Integration engines and their error records.

pub mod lines;
pub mod one_d;
pub mod pair;

use crate::error::{Error, Result};
use crate::geometry::{Point, Shape};
use crate::kernels::KernelSpec;
use lines::{integrate_directions, integrate_lines};
use pair::{complement_pairs_split, Convention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo,
    TensorMidpoint,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::MonteCarlo => "monte-carlo",
            Method::TensorMidpoint => "tensor-midpoint",
        })
    }
}

/// Treatment of coincident cell pairs in tensor double integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NearDiagonal {
    /// Drop the pair, report an estimate of its size in the error.
    SkipAndBound,
    /// Replace the pair by the integrand at a half-cell offset.
    PairOffset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub method: Method,
    /// Samples (Monte Carlo) or nodes (tensor grids).
    pub budget: usize,
    pub seed: u64,
    /// Padding of the near field around a shape, in diameters.
    pub padding: f64,
    pub near_diagonal: NearDiagonal,
    /// Use one-dimensional quadrature for ball self-terms instead of sampling.
    pub exact_ball_paths: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: Method::MonteCarlo,
            budget: 100_000,
            seed: 0,
            padding: 2.0,
            near_diagonal: NearDiagonal::SkipAndBound,
            exact_ball_paths: true,
        }
    }
}

pub const MIN_BUDGET: usize = 1000;

impl QuadratureSpec {
    pub fn monte_carlo(budget: usize, seed: u64) -> Self {
        QuadratureSpec {
            budget,
            seed,
            ..Default::default()
        }
    }

    /// Tensor grid; the default budget is 64^N.
    pub fn tensor(budget: usize) -> Self {
        QuadratureSpec {
            method: Method::TensorMidpoint,
            budget,
            ..Default::default()
        }
    }

    pub fn default_tensor_budget(dim: usize) -> usize {
        64usize.pow(dim as u32)
    }

    pub fn sampled_only(mut self) -> Self {
        self.exact_ball_paths = false;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget < MIN_BUDGET {
            return Err(Error::param("budget", format!("must be at least {MIN_BUDGET}, got {}", self.budget)));
        }
        if !(self.padding > 0.0) || !self.padding.is_finite() {
            return Err(Error::param("padding", format!("must be positive, got {}", self.padding)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// The far-field part exceeds 20% of a complement integral.
    PaddingTooSmall { tail_fraction: f64 },
    /// A grid cell containing a non-integrable point was excluded.
    SingularCell { detail: String },
    /// Value computed outside the regime covered by the theory (e.g. alpha != 1).
    Exploratory { detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub value: f64,
    pub error: f64,
    pub samples: usize,
    pub seed: u64,
    pub method: Method,
    pub warnings: Vec<Warning>,
}

impl IntegralEstimate {
    pub fn zero(spec: &QuadratureSpec) -> Self {
        Self::exact(0.0, spec)
    }

    /// A value known to rounding; the error is a relative 1e-12 allowance.
    pub fn exact(value: f64, spec: &QuadratureSpec) -> Self {
        IntegralEstimate {
            value,
            error: 1e-12 * value.abs(),
            samples: 0,
            seed: spec.seed,
            method: spec.method,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn from_parts(value: f64, error: f64, samples: usize, spec: &QuadratureSpec) -> Self {
        IntegralEstimate {
            value,
            error,
            samples,
            seed: spec.seed,
            method: spec.method,
            warnings: Vec::new(),
        }
    }

    /// Sum of independent estimates; errors add in quadrature.
    pub fn plus(&self, o: &IntegralEstimate) -> Self {
        let mut w = self.warnings.clone();
        for x in &o.warnings {
            if !w.contains(x) {
                w.push(x.clone());
            }
        }
        IntegralEstimate {
            value: self.value + o.value,
            error: self.error.hypot(o.error),
            samples: self.samples + o.samples,
            warnings: w,
            ..self.clone()
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        IntegralEstimate {
            value: self.value * k,
            error: self.error * k.abs(),
            ..self.clone()
        }
    }
}

fn grid_side(budget: usize, dim: usize) -> usize {
    ((budget as f64).powf(1.0 / dim as f64).round() as usize).max(2)
}

fn box_point(bb: &crate::geometry::BoundingBox, dim: usize, u: &[f64; 3]) -> Point {
    let mut p = [0.0; 3];
    for a in 0..dim {
        p[a] = bb.lo[a] + u[a] * (bb.hi[a] - bb.lo[a]);
    }
    p
}

/// `int_E f`.
///
/// Monte Carlo samples the bounding box uniformly and filters by the
/// indicator; the tensor rule uses cell midpoints of the bounding box and
/// reports the difference to the grid with half as many cells per axis.
pub fn integral_over<F>(e: &Shape, f: F, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let dim = e.dimension();
    let bb = e.bounding_box();
    if e.is_empty() || bb.volume(dim) == 0.0 {
        return Ok(IntegralEstimate::zero(spec));
    }
    let vol = bb.volume(dim);
    let eval = |p: &Point| if e.contains(p) { f(&p[..dim]) } else { 0.0 };
    match spec.method {
        Method::MonteCarlo => {
            let s = sample_points(spec, 1, |rng, out| {
                let u = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                out[0] = eval(&box_point(&bb, dim, &u));
            });
            Ok(IntegralEstimate::from_parts(vol * s.0[0], vol * s.1[0], spec.budget, spec))
        }
        Method::TensorMidpoint => {
            let grid = |n: usize| -> f64 {
                let total = n.pow(dim as u32);
                let sum: Vec<f64> = (0..total)
                    .into_par_iter()
                    .with_min_len(1024)
                    .map(|idx| {
                        let mut u = [0.5; 3];
                        let mut r = idx;
                        for a in u.iter_mut().take(dim) {
                            *a = ((r % n) as f64 + 0.5) / n as f64;
                            r /= n;
                        }
                        eval(&box_point(&bb, dim, &u))
                    })
                    .collect();
                sum.iter().sum::<f64>() * vol / total as f64
            };
            let n = grid_side(spec.budget, dim);
            let fine = grid(n);
            let coarse = grid((n / 2).max(1));
            Ok(IntegralEstimate::from_parts(fine, (fine - coarse).abs(), n.pow(dim as u32), spec))
        }
    }
}

/// Means and standard errors of per-sample vectors drawn with the spec's seed.
fn sample_points<G>(spec: &QuadratureSpec, ncomp: usize, g: G) -> (Vec<f64>, Vec<f64>)
where
    G: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    const BATCH: usize = 4096;
    let n = spec.budget;
    let parts: Vec<(Vec<f64>, Vec<f64>)> = (0..n.div_ceil(BATCH))
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(b as u64);
            let mut s = vec![0.0; ncomp];
            let mut s2 = vec![0.0; ncomp];
            let mut buf = vec![0.0; ncomp];
            for _ in 0..BATCH.min(n - b * BATCH) {
                g(&mut rng, &mut buf);
                for i in 0..ncomp {
                    s[i] += buf[i];
                    s2[i] += buf[i] * buf[i];
                }
            }
            (s, s2)
        })
        .collect();
    let mut s = vec![0.0; ncomp];
    let mut s2 = vec![0.0; ncomp];
    for (a, b) in &parts {
        for i in 0..ncomp {
            s[i] += a[i];
            s2[i] += b[i];
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = s.iter().map(|x| x / nf).collect();
    let err = (0..ncomp)
        .map(|i| ((s2[i] / nf - mean[i] * mean[i]).max(0.0) / (nf - 1.0)).sqrt())
        .collect();
    (mean, err)
}

/// `int_E int_F g(x, y)`.
///
/// Monte Carlo draws independent uniform points in the two bounding boxes.
/// The tensor rule sums midpoint values over pairs of grid cells whose
/// centers lie in the shapes; coincident pairs follow `spec.near_diagonal`.
pub fn double_integral<G>(e: &Shape, f: &Shape, g: G, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    G: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let dim = e.dimension();
    if f.dimension() != dim {
        return Err(Error::param("shape", "double integral over shapes of different dimension"));
    }
    let (be, bf) = (e.bounding_box(), f.bounding_box());
    if e.is_empty() || f.is_empty() || be.volume(dim) == 0.0 || bf.volume(dim) == 0.0 {
        return Ok(IntegralEstimate::zero(spec));
    }
    match spec.method {
        Method::MonteCarlo => {
            let vol = be.volume(dim) * bf.volume(dim);
            let s = sample_points(spec, 1, |rng, out| {
                let u = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                let v = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                let x = box_point(&be, dim, &u);
                let y = box_point(&bf, dim, &v);
                out[0] = if x != y && e.contains(&x) && f.contains(&y) {
                    g(&x[..dim], &y[..dim])
                } else {
                    0.0
                };
            });
            Ok(IntegralEstimate::from_parts(vol * s.0[0], vol * s.1[0], spec.budget, spec))
        }
        Method::TensorMidpoint => {
            let n = grid_side(spec.budget, dim);
            let (fine, bound) = cell_pairs(e, f, &g, dim, n, spec.near_diagonal);
            let (coarse, _) = cell_pairs(e, f, &g, dim, (n / 2).max(1), spec.near_diagonal);
            let mut est = IntegralEstimate::from_parts(fine, (fine - coarse).abs() + bound, n.pow(dim as u32), spec);
            if bound > 0.0 && spec.near_diagonal == NearDiagonal::SkipAndBound {
                est.warnings.push(Warning::SingularCell {
                    detail: format!("coincident cell pairs skipped, bound {bound:e} added to the error"),
                });
            }
            Ok(est)
        }
    }
}

fn cells_of(s: &Shape, dim: usize, n: usize) -> (Vec<Point>, f64, f64) {
    let bb = s.bounding_box();
    let side = (0..dim).map(|a| bb.hi[a] - bb.lo[a]).fold(0.0, f64::max);
    let h = side / n as f64;
    let mut out = Vec::new();
    let counts: Vec<usize> = (0..dim).map(|a| (((bb.hi[a] - bb.lo[a]) / h).ceil() as usize).max(1)).collect();
    let total: usize = counts.iter().product();
    for idx in 0..total {
        let mut p = [0.0; 3];
        let mut r = idx;
        for a in 0..dim {
            p[a] = bb.lo[a] + ((r % counts[a]) as f64 + 0.5) * h;
            r /= counts[a];
        }
        if s.contains(&p) {
            out.push(p);
        }
    }
    (out, h, h.powi(dim as i32))
}

fn cell_pairs<G>(e: &Shape, f: &Shape, g: &G, dim: usize, n: usize, rule: NearDiagonal) -> (f64, f64)
where
    G: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let (ce, he, we) = cells_of(e, dim, n);
    let (cf, hf, wf) = cells_of(f, dim, n);
    let h = he.max(hf);
    let rows: Vec<(f64, f64)> = ce
        .par_iter()
        .map(|x| {
            let mut s = 0.0;
            let mut skipped = 0.0;
            for y in &cf {
                if x == y {
                    let mut off = *x;
                    match rule {
                        NearDiagonal::SkipAndBound => {
                            off[0] += 0.25 * h;
                            skipped += g(&x[..dim], &off[..dim]).abs();
                        }
                        NearDiagonal::PairOffset => {
                            off[0] += 0.5 * h;
                            s += g(&x[..dim], &off[..dim]);
                        }
                    }
                } else {
                    s += g(&x[..dim], &y[..dim]);
                }
            }
            (s, skipped)
        })
        .collect();
    let (mut s, mut b) = (0.0, 0.0);
    for (a, c) in rows {
        s += a;
        b += c;
    }
    (s * we * wf, b * we * wf)
}

/// `int_E int_{E^c} K(x - y)`, split into the complement inside the padded
/// bounding sphere and the far field outside it.
///
/// Both parts are integrated exactly along each sampled line, so the total
/// does not depend on the padding; the split is reported to flag shapes for
/// which most of the interaction is far-field.
pub fn complement_double_integral(e: &Shape, kernel: &KernelSpec, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    spec.validate()?;
    if kernel.dimension() != e.dimension() {
        return Err(Error::param("kernel", "kernel and shape dimensions differ"));
    }
    if e.is_empty() {
        return Ok(IntegralEstimate::zero(spec));
    }
    let k1 = kernel.line_kernel(Convention::Tail, 0.0)?;
    let (c, r) = e.bounding_sphere();
    let pad = r * (1.0 + 2.0 * spec.padding);
    let s = integrate_lines(e.dimension(), &c, r, spec, 3, |line, out| {
        let iv = e.line_intervals(line);
        if iv.is_empty() {
            return;
        }
        // padded sphere along this line
        let d = crate::geometry::sub(&line.point, &c);
        let b = crate::geometry::dot(&d, &line.dir);
        let disc = (b * b - (crate::geometry::dot(&d, &d) - pad * pad)).max(0.0).sqrt();
        let (lo, hi) = ((-b - disc).min(iv[0].0), (-b + disc).max(iv[iv.len() - 1].1));
        let (near, tail) = complement_pairs_split(&k1, &iv, lo, hi);
        out[0] = near + tail;
        out[1] = near;
        out[2] = tail;
    });
    let mut est = IntegralEstimate::from_parts(s.values[0], s.errors[0], s.samples, spec);
    if s.values[0] > 0.0 && s.values[2] / s.values[0] > 0.2 {
        est.warnings.push(Warning::PaddingTooSmall {
            tail_fraction: s.values[2] / s.values[0],
        });
    }
    Ok(est)
}

/// `int_{S^{N-1}} f(nu) dH^{N-1}(nu)`.
pub fn sphere_average<F>(f: F, dim: usize, spec: &QuadratureSpec) -> Result<IntegralEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    crate::geometry::check_dimension(dim)?;
    let s = integrate_directions(dim, spec, 1, |d, out| out[0] = f(&d[..dim]));
    Ok(IntegralEstimate::from_parts(s.values[0], s.errors[0], s.samples, spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn budget_floor() {
        assert!(QuadratureSpec::monte_carlo(999, 0).validate().is_err());
        assert!(QuadratureSpec::monte_carlo(1000, 0).validate().is_ok());
    }

    #[test]
    fn volume_and_radial_integrals_over_balls() {
        let b3 = Shape::ball(&[0.0; 3], 1.0).unwrap();
        let v = integral_over(&b3, |_| 1.0, &QuadratureSpec::tensor(64usize.pow(3))).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() < 0.01, "{v:?}");
        let r = integral_over(&b3, |x| 1.0 / x.iter().map(|a| a * a).sum::<f64>().sqrt(), &QuadratureSpec::monte_carlo(400_000, 3)).unwrap();
        assert!((r.value - 2.0 * PI).abs() < 3.0 * r.error + 1e-9, "{r:?}");
    }

    #[test]
    fn empty_shapes_give_zero() {
        let e = Shape::empty(2);
        let b = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
        let spec = QuadratureSpec::default();
        assert_eq!(integral_over(&e, |_| 1.0, &spec).unwrap().value, 0.0);
        assert_eq!(double_integral(&b, &e, |_, _| 1.0, &spec).unwrap().value, 0.0);
    }

    #[test]
    fn separated_balls_coulomb_bounds() {
        let u = Shape::ball(&[0.0, 0.0, 0.0], 1.0).unwrap();
        let w = Shape::ball(&[10.0, 0.0, 0.0], 1.0).unwrap();
        let m = 4.0 * PI / 3.0;
        let g = |x: &[f64], y: &[f64]| 1.0 / x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let est = double_integral(&u, &w, g, &QuadratureSpec::monte_carlo(200_000, 5)).unwrap();
        assert!(est.value > m * m / 12.0 - 3.0 * est.error && est.value < m * m / 8.0 + 3.0 * est.error);
        let tens = double_integral(&u, &w, g, &QuadratureSpec::tensor(4096)).unwrap();
        assert!(tens.value > m * m / 12.0 && tens.value < m * m / 8.0, "{tens:?}");
    }

    #[test]
    fn double_integral_swap_symmetry() {
        let u = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
        let w = Shape::ball(&[3.0, 0.5], 0.5).unwrap();
        let g = |x: &[f64], y: &[f64]| (x[0] - y[0]).abs() + 2.0 * y[1];
        let spec = QuadratureSpec::monte_carlo(100_000, 9);
        let a = double_integral(&u, &w, g, &spec).unwrap();
        let b = double_integral(&w, &u, |x, y| g(y, x), &spec.clone().with_seed(10)).unwrap();
        assert!((a.value - b.value).abs() < 3.0 * a.error.hypot(b.error), "{a:?} {b:?}");
    }

    #[test]
    fn sphere_average_examples() {
        let spec = QuadratureSpec::tensor(100_000);
        assert!((sphere_average(|_| 1.0, 3, &spec).unwrap().value - 4.0 * PI).abs() < 1e-10);
        assert!((sphere_average(|_| 1.0, 2, &spec).unwrap().value - 2.0 * PI).abs() < 1e-10);
        let v = sphere_average(|n| n[0].max(0.0), 2, &spec).unwrap();
        assert!((v.value - 2.0).abs() < 1e-6, "{v:?}");
    }
}
