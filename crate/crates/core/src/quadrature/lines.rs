//! Integration over the space of lines and over directions.
//!
//! A double integral over `R^N x R^N` is an integral over lines:
//!
//! ```text
//! int int f(x, y) dx dy = int_{lines} int int |t - t'|^{N-1} f(p + t theta, p + t' theta) dt dt'
//! ```
//!
//! where unoriented lines are parametrised by a direction on a half sphere
//! and a foot point in the orthogonal hyperplane. Lines missing the bounding
//! sphere `(center, radius)` of the integration domain contribute nothing, so
//! only foot points in an `(N-1)`-disc of that radius are sampled.

use super::{Method, QuadratureSpec};
use crate::constants::{ball_volume, sphere_area};
use crate::geometry::{Line, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

const BATCH: usize = 1024;

/// Per-component estimates from one sampling pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub values: Vec<f64>,
    /// Standard error (Monte Carlo) or refinement difference (tensor grids).
    pub errors: Vec<f64>,
    pub samples: usize,
}

impl Sampled {
    fn zeros(ncomp: usize) -> Self {
        Sampled {
            values: vec![0.0; ncomp],
            errors: vec![0.0; ncomp],
            samples: 0,
        }
    }
}

#[derive(Clone)]
struct Stats {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Stats {
    fn new(ncomp: usize) -> Self {
        Stats {
            n: 0.0,
            mean: vec![0.0; ncomp],
            m2: vec![0.0; ncomp],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.n;
            *s += d * (v - *m);
        }
    }

    fn merge(&mut self, o: &Stats) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        for i in 0..self.mean.len() {
            let d = o.mean[i] - self.mean[i];
            self.mean[i] += d * o.n / n;
            self.m2[i] += o.m2[i] + d * d * self.n * o.n / n;
        }
        self.n = n;
    }

    fn finish(&self, measure: f64) -> Sampled {
        let n = self.n;
        Sampled {
            values: self.mean.iter().map(|m| m * measure).collect(),
            errors: self
                .m2
                .iter()
                .map(|s| if n > 1.0 { measure * (s / (n - 1.0) / n).sqrt() } else { f64::INFINITY })
                .collect(),
            samples: n as usize,
        }
    }
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Orthonormal basis of the plane orthogonal to a unit vector in R^3.
fn frame(d: &Point) -> (Point, Point) {
    let a = if d[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let mut e1 = [a[1] * d[2] - a[2] * d[1], a[2] * d[0] - a[0] * d[2], a[0] * d[1] - a[1] * d[0]];
    let n = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    let e2 = [d[1] * e1[2] - d[2] * e1[1], d[2] * e1[0] - d[0] * e1[2], d[0] * e1[1] - d[1] * e1[0]];
    (e1, e2)
}

fn dir3(cos_t: f64, phi: f64) -> Point {
    let s = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), cos_t]
}

/// Measure of the set of lines meeting a ball of radius `r`.
pub fn line_measure(dim: usize, r: f64) -> f64 {
    0.5 * sphere_area(dim) * ball_volume(dim - 1) * r.powi(dim as i32 - 1)
}

fn random_line(dim: usize, c: &Point, r: f64, rng: &mut ChaCha8Rng) -> Line {
    if dim == 2 {
        let th = PI * rng.random::<f64>();
        let u = r * (2.0 * rng.random::<f64>() - 1.0);
        let dir = [th.cos(), th.sin(), 0.0];
        Line {
            point: [c[0] - u * dir[1], c[1] + u * dir[0], 0.0],
            dir,
        }
    } else {
        let dir = dir3(rng.random::<f64>(), 2.0 * PI * rng.random::<f64>());
        let (e1, e2) = frame(&dir);
        let rho = r * rng.random::<f64>().sqrt();
        let a = 2.0 * PI * rng.random::<f64>();
        let (u1, u2) = (rho * a.cos(), rho * a.sin());
        Line {
            point: [
                c[0] + u1 * e1[0] + u2 * e2[0],
                c[1] + u1 * e1[1] + u2 * e2[1],
                c[2] + u1 * e1[2] + u2 * e2[2],
            ],
            dir,
        }
    }
}

/// Integrate the vector-valued line functional `f` over all lines meeting the
/// ball `(center, radius)`.
///
/// `f` receives a zeroed buffer of length `ncomp` and adds its values.
pub fn integrate_lines<F>(dim: usize, center: &Point, radius: f64, spec: &QuadratureSpec, ncomp: usize, f: F) -> Sampled
where
    F: Fn(&Line, &mut [f64]) + Sync,
{
    if !(radius > 0.0) || ncomp == 0 {
        return Sampled::zeros(ncomp);
    }
    match spec.method {
        Method::MonteCarlo => {
            let n = spec.budget;
            let batches = n.div_ceil(BATCH);
            let parts: Vec<Stats> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut rng = batch_rng(spec.seed, b);
                    let mut st = Stats::new(ncomp);
                    let mut buf = vec![0.0; ncomp];
                    let count = BATCH.min(n - b * BATCH);
                    for _ in 0..count {
                        let line = random_line(dim, center, radius, &mut rng);
                        buf.iter_mut().for_each(|x| *x = 0.0);
                        f(&line, &mut buf);
                        st.push(&buf);
                    }
                    st
                })
                .collect();
            let mut total = Stats::new(ncomp);
            for p in &parts {
                total.merge(p);
            }
            total.finish(line_measure(dim, radius))
        }
        Method::TensorMidpoint => {
            let (fine, n_fine) = tensor_lines(dim, center, radius, spec.budget, ncomp, &f);
            let (coarse, n_coarse) = tensor_lines(dim, center, radius, (spec.budget / (1 << (2 * dim - 2))).max(1), ncomp, &f);
            Sampled {
                errors: fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).collect(),
                values: fine,
                samples: n_fine + n_coarse,
            }
        }
    }
}

fn tensor_lines<F>(dim: usize, c: &Point, r: f64, budget: usize, ncomp: usize, f: &F) -> (Vec<f64>, usize)
where
    F: Fn(&Line, &mut [f64]) + Sync,
{
    if dim == 2 {
        let n = ((budget as f64).sqrt().round() as usize).max(2);
        let w = (PI / n as f64) * (2.0 * r / n as f64);
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let th = (i as f64 + 0.5) * PI / n as f64;
                let dir = [th.cos(), th.sin(), 0.0];
                let mut acc = vec![0.0; ncomp];
                let mut buf = vec![0.0; ncomp];
                for j in 0..n {
                    let u = -r + (j as f64 + 0.5) * 2.0 * r / n as f64;
                    let line = Line {
                        point: [c[0] - u * dir[1], c[1] + u * dir[0], 0.0],
                        dir,
                    };
                    buf.iter_mut().for_each(|x| *x = 0.0);
                    f(&line, &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                }
                acc
            })
            .collect();
        (reduce_rows(rows, ncomp, w), n * n)
    } else {
        // 2 n^2 directions on the half sphere, (2n)^2 foot points
        let n = (((budget as f64) / 8.0).powf(0.25).round() as usize).max(1);
        let nphi = 2 * n;
        let nu = 2 * n;
        let w_dir = (1.0 / n as f64) * (2.0 * PI / nphi as f64);
        let w_u = (2.0 * r / nu as f64).powi(2);
        let rows: Vec<Vec<f64>> = (0..n * nphi)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / nphi, k % nphi);
                let dir = dir3((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) * 2.0 * PI / nphi as f64);
                let (e1, e2) = frame(&dir);
                let mut acc = vec![0.0; ncomp];
                let mut buf = vec![0.0; ncomp];
                for a in 0..nu {
                    let u1 = -r + (a as f64 + 0.5) * 2.0 * r / nu as f64;
                    for b in 0..nu {
                        let u2 = -r + (b as f64 + 0.5) * 2.0 * r / nu as f64;
                        if u1 * u1 + u2 * u2 > r * r {
                            continue;
                        }
                        let line = Line {
                            point: [
                                c[0] + u1 * e1[0] + u2 * e2[0],
                                c[1] + u1 * e1[1] + u2 * e2[1],
                                c[2] + u1 * e1[2] + u2 * e2[2],
                            ],
                            dir,
                        };
                        buf.iter_mut().for_each(|x| *x = 0.0);
                        f(&line, &mut buf);
                        acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                    }
                }
                acc
            })
            .collect();
        (reduce_rows(rows, ncomp, w_dir * w_u), n * nphi * nu * nu)
    }
}

fn reduce_rows(rows: Vec<Vec<f64>>, ncomp: usize, w: f64) -> Vec<f64> {
    let mut total = vec![0.0; ncomp];
    for row in rows {
        total.iter_mut().zip(&row).for_each(|(t, x)| *t += x);
    }
    total.iter_mut().for_each(|t| *t *= w);
    total
}

fn uniform_in_ball(dim: usize, c: &Point, r: f64, rng: &mut ChaCha8Rng) -> Point {
    loop {
        let mut p = [0.0; 3];
        for x in p.iter_mut().take(dim) {
            *x = 2.0 * rng.random::<f64>() - 1.0;
        }
        if p.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return [c[0] + r * p[0], c[1] + r * p[1], c[2] + r * p[2]];
        }
    }
}

fn sphere_chord(line: &Line, c: &Point, r: f64) -> Option<(f64, f64)> {
    let d = [line.point[0] - c[0], line.point[1] - c[1], line.point[2] - c[2]];
    let b = d[0] * line.dir[0] + d[1] * line.dir[1] + d[2] * line.dir[2];
    let disc = b * b - (d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - r * r);
    (disc > 0.0).then(|| (-b - disc.sqrt(), -b + disc.sqrt()))
}

/// Integrate a line functional supported on lines meeting both balls `a` and `b`.
///
/// Lines are drawn through one uniform point of each ball. By the
/// Blaschke-Petkantschin formula such a line has density
/// `int_{L∩a} int_{L∩b} |t - t'|^{N-1} / (|a| |b|)`, and samples are
/// weighted by its inverse. This keeps the variance bounded when the balls
/// are far apart, where lines through one ball rarely meet the other.
pub fn integrate_line_pairs<F>(dim: usize, a: (&Point, f64), b: (&Point, f64), spec: &QuadratureSpec, ncomp: usize, f: F) -> Sampled
where
    F: Fn(&Line, &mut [f64]) + Sync,
{
    if !(a.1 > 0.0) || !(b.1 > 0.0) || ncomp == 0 {
        return Sampled::zeros(ncomp);
    }
    let n = spec.budget;
    let vol = ball_volume(dim) * ball_volume(dim) * (a.1 * b.1).powi(dim as i32);
    let g = |x: f64| x.abs().powi(dim as i32 + 1) / (dim * (dim + 1)) as f64;
    let parts: Vec<Stats> = (0..n.div_ceil(BATCH))
        .into_par_iter()
        .map(|k| {
            let mut rng = batch_rng(spec.seed, k);
            let mut st = Stats::new(ncomp);
            let mut buf = vec![0.0; ncomp];
            for _ in 0..BATCH.min(n - k * BATCH) {
                let x = uniform_in_ball(dim, a.0, a.1, &mut rng);
                let y = uniform_in_ball(dim, b.0, b.1, &mut rng);
                let d = [y[0] - x[0], y[1] - x[1], y[2] - x[2]];
                let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                buf.iter_mut().for_each(|v| *v = 0.0);
                if len > 0.0 {
                    let line = Line {
                        point: x,
                        dir: [d[0] / len, d[1] / len, d[2] / len],
                    };
                    if let (Some(i), Some(j)) = (sphere_chord(&line, a.0, a.1), sphere_chord(&line, b.0, b.1)) {
                        let density = (g(j.1 - i.0) - g(j.0 - i.0) - g(j.1 - i.1) + g(j.0 - i.1)) / vol;
                        f(&line, &mut buf);
                        buf.iter_mut().for_each(|v| *v /= density);
                    }
                }
                st.push(&buf);
            }
            st
        })
        .collect();
    let mut total = Stats::new(ncomp);
    for p in &parts {
        total.merge(p);
    }
    total.finish(1.0)
}

fn random_direction(dim: usize, rng: &mut ChaCha8Rng) -> Point {
    if dim == 2 {
        let th = 2.0 * PI * rng.random::<f64>();
        [th.cos(), th.sin(), 0.0]
    } else {
        dir3(2.0 * rng.random::<f64>() - 1.0, 2.0 * PI * rng.random::<f64>())
    }
}

/// Integrate `f` over the full unit sphere `S^{N-1}` with surface measure.
pub fn integrate_directions<F>(dim: usize, spec: &QuadratureSpec, ncomp: usize, f: F) -> Sampled
where
    F: Fn(&Point, &mut [f64]) + Sync,
{
    if ncomp == 0 {
        return Sampled::zeros(0);
    }
    match spec.method {
        Method::MonteCarlo => {
            let n = spec.budget;
            let batches = n.div_ceil(BATCH);
            let parts: Vec<Stats> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut rng = batch_rng(spec.seed, b);
                    let mut st = Stats::new(ncomp);
                    let mut buf = vec![0.0; ncomp];
                    for _ in 0..BATCH.min(n - b * BATCH) {
                        let d = random_direction(dim, &mut rng);
                        buf.iter_mut().for_each(|x| *x = 0.0);
                        f(&d, &mut buf);
                        st.push(&buf);
                    }
                    st
                })
                .collect();
            let mut total = Stats::new(ncomp);
            for p in &parts {
                total.merge(p);
            }
            total.finish(sphere_area(dim))
        }
        Method::TensorMidpoint => {
            let (fine, a) = tensor_directions(dim, spec.budget, ncomp, &f);
            let (coarse, b) = tensor_directions(dim, (spec.budget / (1 << (dim - 1))).max(1), ncomp, &f);
            Sampled {
                errors: fine.iter().zip(&coarse).map(|(x, y)| (x - y).abs()).collect(),
                values: fine,
                samples: a + b,
            }
        }
    }
}

fn tensor_directions<F>(dim: usize, budget: usize, ncomp: usize, f: &F) -> (Vec<f64>, usize)
where
    F: Fn(&Point, &mut [f64]) + Sync,
{
    if dim == 2 {
        let n = budget.max(2);
        let w = 2.0 * PI / n as f64;
        let chunk = n.div_ceil(64);
        let rows: Vec<Vec<f64>> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut acc = vec![0.0; ncomp];
                let mut buf = vec![0.0; ncomp];
                for i in c * chunk..((c + 1) * chunk).min(n) {
                    let th = (i as f64 + 0.5) * w;
                    buf.iter_mut().for_each(|x| *x = 0.0);
                    f(&[th.cos(), th.sin(), 0.0], &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                }
                acc
            })
            .collect();
        (reduce_rows(rows, ncomp, w), n)
    } else {
        // equal-area cells: n uniform steps in cos(theta) on [-1, 1], 2n in phi
        let n = (((budget as f64) / 2.0).sqrt().round() as usize).max(1);
        let nphi = 2 * n;
        let w = (2.0 / n as f64) * (2.0 * PI / nphi as f64);
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let ct = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
                let mut acc = vec![0.0; ncomp];
                let mut buf = vec![0.0; ncomp];
                for j in 0..nphi {
                    let d = dir3(ct, (j as f64 + 0.5) * 2.0 * PI / nphi as f64);
                    buf.iter_mut().for_each(|x| *x = 0.0);
                    f(&d, &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                }
                acc
            })
            .collect();
        (reduce_rows(rows, ncomp, w), n * nphi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;

    fn chord(line: &Line, r: f64) -> f64 {
        let b = line.point[0] * line.dir[0] + line.point[1] * line.dir[1] + line.point[2] * line.dir[2];
        let c = line.point.iter().map(|x| x * x).sum::<f64>() - r * r;
        let disc = b * b - c;
        if disc > 0.0 {
            2.0 * disc.sqrt()
        } else {
            0.0
        }
    }

    // Crofton: the integral of chord lengths over all lines is the volume
    // times the measure of the half sphere.
    #[test]
    fn chord_lengths_integrate_to_volume() {
        for dim in [2usize, 3] {
            for spec in [QuadratureSpec::monte_carlo(200_000, 7), QuadratureSpec::tensor(200_000)] {
                let s = integrate_lines(dim, &[0.0; 3], 1.3, &spec, 1, |l, out| out[0] = chord(l, 1.3));
                let exact = 0.5 * sphere_area(dim) * ball_volume(dim) * 1.3f64.powi(dim as i32);
                let tol = 3.0 * s.errors[0] + 1e-3 * exact;
                assert!((s.values[0] - exact).abs() < tol, "dim {dim}: {} vs {exact} ({:?})", s.values[0], spec.method);
            }
        }
    }

    #[test]
    fn line_pairs_reproduce_product_of_volumes() {
        // int_L |L∩a||L∩b| = int_a int_b |x - y|^{1-N}, close to |a||b| / d^{N-1} for far balls
        for dim in [2usize, 3] {
            let ca = [0.0; 3];
            let cb = [20.0, 0.0, 0.0];
            let spec = QuadratureSpec::monte_carlo(20_000, 3);
            let s = integrate_line_pairs(dim, (&ca, 1.0), (&cb, 0.5), &spec, 1, |l, out| {
                if let (Some(i), Some(j)) = (sphere_chord(l, &ca, 1.0), sphere_chord(l, &cb, 0.5)) {
                    out[0] = (i.1 - i.0) * (j.1 - j.0);
                }
            });
            let far = ball_volume(dim).powi(2) * 0.5f64.powi(dim as i32) / 20f64.powi(dim as i32 - 1);
            assert!((s.values[0] / far - 1.0).abs() < 0.01, "{dim}: {:?} vs {far}", s.values);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let spec = QuadratureSpec::monte_carlo(5000, 42);
        let a = integrate_lines(3, &[0.0; 3], 1.0, &spec, 1, |l, out| out[0] = chord(l, 1.0));
        let b = integrate_lines(3, &[0.0; 3], 1.0, &spec, 1, |l, out| out[0] = chord(l, 1.0));
        assert_eq!(a, b);
    }

    #[test]
    fn directions_cover_the_sphere() {
        for dim in [2usize, 3] {
            let s = integrate_directions(dim, &QuadratureSpec::tensor(10_000), 1, |_, out| out[0] = 1.0);
            assert!((s.values[0] - sphere_area(dim)).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_is_orthonormal() {
        for d in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [1.0, 0.0, 0.0]] {
            let (a, b) = frame(&d);
            let dt = |x: &Point, y: &Point| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            assert!(dt(&a, &d).abs() < 1e-15 && dt(&b, &d).abs() < 1e-15 && dt(&a, &b).abs() < 1e-15);
            assert!((dt(&a, &a) - 1.0).abs() < 1e-15 && (dt(&b, &b) - 1.0).abs() < 1e-15);
        }
    }
}
