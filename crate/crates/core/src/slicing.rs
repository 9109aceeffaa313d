//! Halfspace cuts of a set and the cut inequality
//!
//! ```text
//! I_V(E+, E-) <= 2 I_K(E+, E-) + A R(E-)
//! ```
//!
//! with `E+- = E ∩ {x . nu >=< l}`, `I_V(U, W) = int_U int_W |x - y|^{-1}` and
//! `I_K(U, W) = int_U int_W K(x - y)`. A minimiser satisfies it for every cut.
//!
//! Lines are split exactly at their crossing with the cutting plane, so voxel
//! cells are never classified by their centers here.

use crate::constants::DimensionConstants;
use crate::energy::{touches_origin, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{dot, restrict_intervals, Line, Point, Shape};
use crate::kernels::KernelSpec;
use crate::quadrature::lines::{integrate_directions, integrate_lines, Sampled};
use crate::quadrature::pair::{cross_pairs, power_integral, self_pairs, Convention, Interval, PiecewiseLineKernel};
use crate::quadrature::{sphere_average, IntegralEstimate, QuadratureSpec};
use crate::thresholds::{self, Convention as Exponent};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One evaluation of the cut inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceDefectRecord {
    pub direction: usize,
    pub nu: [f64; 3],
    pub l: f64,
    /// `I_V(E+, E-)`.
    pub lhs: f64,
    pub lhs_error: f64,
    /// `2 I_K(E+, E-)`.
    pub kernel_term: f64,
    pub kernel_error: f64,
    /// `A R(E-)`.
    pub background_term: f64,
    /// `A R(E+)`, the background term of the mirrored cut.
    pub background_plus: f64,
    pub background_error: f64,
    pub rhs: f64,
    pub rhs_error: f64,
    /// `rhs - lhs`; negative values violate the inequality.
    pub defect: f64,
    pub defect_error: f64,
}

/// Offsets `l` at which a direction is cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetGrid {
    Explicit(Vec<f64>),
    /// `points` equispaced offsets spanning the extent of the shape along
    /// `nu`, widened on both sides by `padding` times that extent.
    Span { points: usize, padding: f64 },
}

impl Default for OffsetGrid {
    fn default() -> Self {
        OffsetGrid::Span { points: 64, padding: 0.1 }
    }
}

impl OffsetGrid {
    fn offsets(&self, e: &Shape, nu: &Point) -> Result<Vec<f64>> {
        match self {
            OffsetGrid::Explicit(v) => {
                if v.is_empty() || v.iter().any(|l| !l.is_finite()) {
                    return Err(Error::param("offsets", "need at least one finite offset"));
                }
                Ok(v.clone())
            }
            &OffsetGrid::Span { points, padding } => {
                if points == 0 || !(padding >= 0.0) {
                    return Err(Error::param("offsets", "need points >= 1 and padding >= 0"));
                }
                let (lo, hi) = e.extent(nu);
                let w = (hi - lo).max(0.0);
                let (a, b) = (lo - padding * w, hi + padding * w);
                if points == 1 {
                    return Ok(vec![0.5 * (a + b)]);
                }
                Ok((0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect())
            }
        }
    }
}

/// 16 equispaced angles in two dimensions, 64 Fibonacci points on S^2.
pub fn default_directions(n: usize) -> Result<Vec<Vec<f64>>> {
    spread_directions(n, if n == 2 { 16 } else { 64 })
}

/// `count` equispaced angles (N = 2) or Fibonacci points (N = 3).
pub fn spread_directions(n: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    crate::geometry::check_dimension(n)?;
    if count == 0 {
        return Err(Error::param("directions", "need at least one direction"));
    }
    Ok(if n == 2 {
        (0..count)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        fibonacci_sphere(count)
    })
}

fn fibonacci_sphere(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let p = golden * i as f64;
            vec![r * p.cos(), r * p.sin(), z]
        })
        .collect()
}

fn unit(nu: &[f64], n: usize) -> Result<Point> {
    let p = crate::geometry::to_point(nu, n)?;
    let len = dot(&p, &p).sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::param("nu", "must be a nonzero finite vector"));
    }
    Ok([p[0] / len, p[1] / len, p[2] / len])
}

/// Pieces of `iv` on either side of the plane, where `x . nu = a + t b` along the line.
fn split(iv: &[Interval], a: f64, b: f64, l: f64) -> (Vec<Interval>, Vec<Interval>) {
    if b == 0.0 {
        return if a >= l { (Vec::new(), iv.to_vec()) } else { (iv.to_vec(), Vec::new()) };
    }
    let t = (l - a) / b;
    let lo = restrict_intervals(iv, f64::NEG_INFINITY, t);
    let hi = restrict_intervals(iv, t, f64::INFINITY);
    if b > 0.0 {
        (lo, hi)
    } else {
        (hi, lo)
    }
}

fn interaction_kernel(k: &KernelSpec) -> Result<PiecewiseLineKernel> {
    k.line_kernel(Convention::Tail, 0.0)
        .or_else(|_| k.line_kernel(Convention::Local, 0.0))
}

fn coulomb_kernel(n: usize) -> PiecewiseLineKernel {
    PiecewiseLineKernel::power(1.0, n as f64 - 2.0, Convention::Local).expect("positive exponent")
}

fn check_background(e: &Shape, params: &EnergyParams) -> Result<()> {
    if params.a > 0.0 && params.beta >= e.dimension() as f64 && touches_origin(e) {
        return Err(Error::NonIntegrable(format!(
            "|x|^-{} is not integrable near the origin, which lies in the closure of the shape",
            params.beta
        )));
    }
    Ok(())
}

/// Line pass: per offset `[lhs, 2 I_K, 2 I_K - lhs]`.
fn cut_pass(e: &Shape, nu: &Point, ls: &[f64], k: &PiecewiseLineKernel, spec: &QuadratureSpec) -> Sampled {
    let n = e.dimension();
    let kv = coulomb_kernel(n);
    let (c, r) = e.bounding_sphere();
    integrate_lines(n, &c, r, spec, 3 * ls.len(), |line, out| {
        let iv = e.line_intervals(line);
        if iv.is_empty() {
            return;
        }
        let (a, b) = (dot(&line.point, nu), dot(&line.dir, nu));
        for (j, &l) in ls.iter().enumerate() {
            let (minus, plus) = split(&iv, a, b, l);
            if minus.is_empty() || plus.is_empty() {
                continue;
            }
            let x = cross_pairs(&kv, &minus, &plus).0;
            let y = 2.0 * cross_pairs(k, &minus, &plus).0;
            out[3 * j] = x;
            out[3 * j + 1] = y;
            out[3 * j + 2] = y - x;
        }
    })
}

/// Ray pass: per offset `[R(E-), R(E+)]`.
fn background_pass(e: &Shape, nu: &Point, ls: &[f64], beta: f64, spec: &QuadratureSpec) -> Sampled {
    let n = e.dimension();
    let ex = n as f64 - 1.0 - beta;
    integrate_directions(n, spec, 2 * ls.len(), |dir, out| {
        let ray = Line { point: [0.0; 3], dir: *dir };
        let iv = restrict_intervals(&e.line_intervals(&ray), 0.0, f64::INFINITY);
        if iv.is_empty() {
            return;
        }
        let b = dot(dir, nu);
        let sum = |v: &[Interval]| v.iter().map(|&(s, t)| power_integral(ex, s, t)).sum::<f64>();
        for (j, &l) in ls.iter().enumerate() {
            let (minus, plus) = split(&iv, 0.0, b, l);
            out[2 * j] = sum(&minus);
            out[2 * j + 1] = sum(&plus);
        }
    })
}

fn direction_records(
    e: &Shape,
    index: usize,
    nu: &Point,
    ls: &[f64],
    params: &EnergyParams,
    k: &PiecewiseLineKernel,
    spec: &QuadratureSpec,
) -> Vec<SliceDefectRecord> {
    let cut = cut_pass(e, nu, ls, k, spec);
    let bg = (params.a > 0.0).then(|| background_pass(e, nu, ls, params.beta, spec));
    ls.iter()
        .enumerate()
        .map(|(j, &l)| {
            let (rm, rp, re) = match &bg {
                Some(s) => (
                    params.a * s.values[2 * j],
                    params.a * s.values[2 * j + 1],
                    params.a * s.errors[2 * j],
                ),
                None => (0.0, 0.0, 0.0),
            };
            let (lhs, kern) = (cut.values[3 * j], cut.values[3 * j + 1]);
            let rhs = kern + rm;
            SliceDefectRecord {
                direction: index,
                nu: *nu,
                l,
                lhs,
                lhs_error: cut.errors[3 * j],
                kernel_term: kern,
                kernel_error: cut.errors[3 * j + 1],
                background_term: rm,
                background_plus: rp,
                background_error: re,
                rhs,
                rhs_error: cut.errors[3 * j + 1].hypot(re),
                defect: rhs - lhs,
                defect_error: cut.errors[3 * j + 2].hypot(re),
            }
        })
        .collect()
}

fn prepare(e: &Shape, params: &EnergyParams, spec: &QuadratureSpec) -> Result<PiecewiseLineKernel> {
    spec.validate()?;
    params.validate()?;
    if e.dimension() != params.dimension() {
        return Err(Error::param("shape", "dimension does not match the kernel"));
    }
    check_background(e, params)?;
    interaction_kernel(&params.kernel)
}

/// The cut inequality for the single cut `(nu, l)`; `nu` need not be normalised.
pub fn splitting_defect(e: &Shape, nu: &[f64], l: f64, params: &EnergyParams, spec: &QuadratureSpec) -> Result<SliceDefectRecord> {
    let k = prepare(e, params, spec)?;
    let nu = unit(nu, e.dimension())?;
    if !l.is_finite() {
        return Err(Error::param("l", "must be finite"));
    }
    Ok(direction_records(e, 0, &nu, &[l], params, &k, spec).remove(0))
}

/// Offset-integrated defects of one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSummary {
    pub direction: usize,
    pub nu: [f64; 3],
    /// Trapezoid integral over the offset grid of the defect.
    pub integrated_defect: f64,
    /// Same, with the background term on `E+` for `l > 0`.
    pub integrated_two_sided: f64,
    pub integrated_error: f64,
    pub min_defect: f64,
    pub min_defect_error: f64,
    pub argmin_l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub records: Vec<SliceDefectRecord>,
    pub directions: Vec<DirectionSummary>,
    /// Index into `records` of the most negative defect.
    pub worst: usize,
    /// Some cut violates the inequality by more than three standard errors.
    pub signature: bool,
}

fn trapezoid(x: &[f64], y: impl Fn(usize) -> f64) -> f64 {
    (1..x.len()).map(|i| 0.5 * (x[i] - x[i - 1]) * (y(i) + y(i - 1))).sum()
}

/// Evaluate the cut inequality on a grid of directions and offsets.
///
/// Each direction costs one line pass (and one ray pass when `A > 0`); all
/// offsets share its samples.
pub fn scan(e: &Shape, directions: &[Vec<f64>], offsets: &OffsetGrid, params: &EnergyParams, spec: &QuadratureSpec) -> Result<ScanResult> {
    let k = prepare(e, params, spec)?;
    if directions.is_empty() {
        return Err(Error::param("directions", "need at least one direction"));
    }
    let n = e.dimension();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for (i, d) in directions.iter().enumerate() {
        let nu = unit(d, n)?;
        let ls = offsets.offsets(e, &nu)?;
        let rec = direction_records(e, i, &nu, &ls, params, &k, spec);
        let two_sided = |j: usize| {
            let r = &rec[j];
            if r.l > 0.0 {
                r.defect - r.background_term + r.background_plus
            } else {
                r.defect
            }
        };
        let worst = (0..rec.len())
            .min_by(|&a, &b| rec[a].defect.total_cmp(&rec[b].defect))
            .expect("nonempty grid");
        summaries.push(DirectionSummary {
            direction: i,
            nu,
            integrated_defect: trapezoid(&ls, |j| rec[j].defect),
            integrated_two_sided: trapezoid(&ls, two_sided),
            integrated_error: trapezoid(&ls, |j| rec[j].defect_error),
            min_defect: rec[worst].defect,
            min_defect_error: rec[worst].defect_error,
            argmin_l: rec[worst].l,
        });
        records.extend(rec);
    }
    let worst = (0..records.len())
        .min_by(|&a, &b| records[a].defect.total_cmp(&records[b].defect))
        .expect("nonempty scan");
    let signature = records.iter().any(|r| r.defect < -3.0 * r.defect_error);
    Ok(ScanResult {
        records,
        directions: summaries,
        worst,
        signature,
    })
}

/// `int_{S^{N-1}} (x . nu)_+ dnu = omega_{N-2} |x| / (N - 1)`.
pub fn sphere_positive_integral(x: &[f64]) -> Result<f64> {
    let n = x.len();
    crate::geometry::check_dimension(n)?;
    let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(DimensionConstants::new(n).positive_part_sphere_constant() * len)
}

/// The same integral with constant `omega_{N-2}`, as stated in the source
/// derivation. Agrees with [`sphere_positive_integral`] only for N = 2.
pub fn sphere_positive_integral_uncorrected(x: &[f64]) -> Result<f64> {
    let n = x.len();
    crate::geometry::check_dimension(n)?;
    let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(DimensionConstants::new(n).sphere_below * len)
}

/// Direct quadrature of the sphere integral.
pub fn sphere_positive_quadrature(x: &[f64], spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    sphere_average(|nu| x.iter().zip(nu).map(|(a, b)| a * b).sum::<f64>().max(0.0), x.len(), spec)
}

/// A layer-cake identity: an offset integral against its closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub layered: f64,
    pub direct: f64,
    pub residual: f64,
    /// Sampling error of the residual plus the fine/coarse trapezoid gap.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCakeChecks {
    /// `int_{-inf}^0 R(E-_l) dl = int_E (x . nu)_- |x|^-beta`.
    pub background: IdentityCheck,
    /// `int I_V(E+_l, E-_l) dl = int_E int_E ((y - x) . nu)_+ / |x - y|`.
    pub cross: IdentityCheck,
}

fn identity(s: &Sampled) -> IdentityCheck {
    IdentityCheck {
        layered: s.values[2],
        direct: s.values[3],
        residual: s.values[0],
        error: s.errors[0] + (s.values[0] - s.values[1]).abs(),
    }
}

/// Trapezoid sums over `ls` and over every other point of `ls`.
fn fine_coarse(ls: &[f64], y: &[f64]) -> (f64, f64) {
    let fine = trapezoid(ls, |i| y[i]);
    let xs: Vec<f64> = ls.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = y.iter().step_by(2).copied().collect();
    (fine, trapezoid(&xs, |i| ys[i]))
}

fn odd_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect()
}

/// Check both layer-cake identities for direction `nu` on offset grids of
/// `points` nodes (odd, at least 5).
pub fn layer_cake_checks(e: &Shape, nu: &[f64], points: usize, beta: f64, spec: &QuadratureSpec) -> Result<LayerCakeChecks> {
    spec.validate()?;
    let n = e.dimension();
    let nu = unit(nu, n)?;
    if points < 5 || points % 2 == 0 {
        return Err(Error::param("points", format!("must be odd and at least 5, got {points}")));
    }
    if !(beta >= 0.0 && beta < n as f64) {
        return Err(Error::param("beta", format!("must lie in [0, {n}), got {beta}")));
    }
    let (lo, hi) = e.extent(&nu);
    if e.is_empty() || !(hi > lo) {
        let zero = IdentityCheck { layered: 0.0, direct: 0.0, residual: 0.0, error: 0.0 };
        return Ok(LayerCakeChecks { background: zero.clone(), cross: zero });
    }

    // R(E-_l) vanishes for l below the extent
    let lb = odd_grid(lo.min(0.0), 0.0, points);
    let ex = n as f64 - 1.0 - beta;
    let bg = integrate_directions(n, spec, 4, |dir, out| {
        let ray = Line { point: [0.0; 3], dir: *dir };
        let iv = restrict_intervals(&e.line_intervals(&ray), 0.0, f64::INFINITY);
        if iv.is_empty() {
            return;
        }
        let b = dot(dir, &nu);
        let y: Vec<f64> = lb
            .iter()
            .map(|&l| split(&iv, 0.0, b, l).0.iter().map(|&(s, t)| power_integral(ex, s, t)).sum())
            .collect();
        let (fine, coarse) = fine_coarse(&lb, &y);
        let direct = if b < 0.0 {
            -b * iv.iter().map(|&(s, t)| power_integral(ex + 1.0, s, t)).sum::<f64>()
        } else {
            0.0
        };
        out.copy_from_slice(&[fine - direct, coarse - direct, fine, direct]);
    });

    let lc = odd_grid(lo, hi, points);
    let kv = coulomb_kernel(n);
    let k1 = PiecewiseLineKernel::power(1.0, n as f64 - 1.0, Convention::Local).expect("positive exponent");
    let (c, r) = e.bounding_sphere();
    let cross = integrate_lines(n, &c, r, spec, 4, |line, out| {
        let iv = e.line_intervals(line);
        if iv.is_empty() {
            return;
        }
        let (a, b) = (dot(&line.point, &nu), dot(&line.dir, &nu));
        let y: Vec<f64> = lc
            .iter()
            .map(|&l| {
                let (m, p) = split(&iv, a, b, l);
                cross_pairs(&kv, &m, &p).0
            })
            .collect();
        let (fine, coarse) = fine_coarse(&lc, &y);
        let direct = b.abs() * 0.5 * self_pairs(&k1, &iv);
        out.copy_from_slice(&[fine - direct, coarse - direct, fine, direct]);
    });
    Ok(LayerCakeChecks {
        background: identity(&bg),
        cross: identity(&cross),
    })
}

/// Cut inequality integrated over all offsets and all directions.
///
/// With `c = omega_{N-2} / (N - 1)`, `m = |E|` and
/// `J = int_E int_E |x - y| K(x - y)` the averaged sides are
///
/// ```text
/// c m^2   <=   2 c J + 2 c A int_E |x|^{1 - beta}
/// ```
///
/// where the background term is taken on `E-` for `l < 0` and on `E+` for
/// `l > 0`. Dividing by `2 c m` gives `m / 2 <= J / m + A b` with
/// `b = |E|^{-1} int_E |x|^{1-beta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBoundReport {
    pub mass: f64,
    /// `int_{S^{N-1}} |theta . nu| dnu` by quadrature; `2 c` exactly.
    pub direction_factor: f64,
    pub direction_factor_error: f64,
    pub sphere_constant: f64,
    pub sphere_constant_uncorrected: f64,
    /// Averaged `I_V` side; `c m^2` exactly.
    pub lhs: f64,
    pub lhs_error: f64,
    /// Averaged `2 I_K` side.
    pub kernel_term: f64,
    pub kernel_error: f64,
    pub background_term: f64,
    pub background_error: f64,
    pub defect: f64,
    pub defect_error: f64,
    /// `J / m`.
    pub kernel_per_mass: f64,
    /// `b`; equals 1 for `beta = 1`.
    pub background_factor: f64,
    /// `m / 2 <= J / m + A b`.
    pub measured_holds: bool,
    /// `C1 m` with the theorem's constants, if they are nondegenerate.
    pub c1_m: Option<f64>,
    /// `C2 + A b`.
    pub c2_plus_a: Option<f64>,
    pub theorem_holds: Option<bool>,
    /// The averaged defect is below minus three standard errors.
    pub signature: bool,
}

/// Average the cut inequality over offsets and directions.
pub fn averaged_mass_bound(e: &Shape, params: &EnergyParams, spec: &QuadratureSpec) -> Result<MassBoundReport> {
    prepare(e, params, spec)?;
    let n = e.dimension();
    let dc = DimensionConstants::new(n);
    let c = dc.positive_part_sphere_constant();
    let df = sphere_average(|nu| nu[0].abs(), n, spec)?;
    let m = e.volume()?;

    // per line: J, m^2 / 2 and their combination
    let kj = params.kernel.line_kernel(Convention::Local, 1.0)?;
    let k1 = PiecewiseLineKernel::power(1.0, n as f64 - 1.0, Convention::Local).expect("positive exponent");
    let (center, r) = e.bounding_sphere();
    let lines = if e.is_empty() {
        None
    } else {
        Some(integrate_lines(n, &center, r, spec, 3, |line, out| {
            let iv = e.line_intervals(line);
            if iv.is_empty() {
                return;
            }
            let j = self_pairs(&kj, &iv);
            let h = 0.5 * self_pairs(&k1, &iv);
            out.copy_from_slice(&[j, h, j - h]);
        }))
    };
    let (j, h, x, xe) = lines.as_ref().map_or((0.0, 0.0, 0.0, 0.0), |s| {
        (s.values[0], s.values[1], s.values[2], s.errors[2])
    });
    let (je, he) = lines.as_ref().map_or((0.0, 0.0), |s| (s.errors[0], s.errors[1]));

    let ex = n as f64 - 1.0 - params.beta;
    let rays = (params.a > 0.0 && !e.is_empty()).then(|| {
        integrate_directions(n, spec, 1, |dir, out| {
            let ray = Line { point: [0.0; 3], dir: *dir };
            out[0] = restrict_intervals(&e.line_intervals(&ray), 0.0, f64::INFINITY)
                .iter()
                .map(|&(s, t)| power_integral(ex + 1.0, s, t))
                .sum();
        })
    });
    let (g, ge) = rays.map_or((0.0, 0.0), |s| (s.values[0], s.errors[0]));

    let d = df.value;
    let inner = x + params.a * g;
    let defect = d * inner;
    let defect_error = d * xe.hypot(params.a * ge) + inner.abs() * df.error;
    let b = if m > 0.0 { g / m } else { 0.0 };
    let kpm = if m > 0.0 { j / m } else { 0.0 };
    let theorem = thresholds::general_constants(n, params.kernel.s(), params.kernel.epsilon(), params.beta, Exponent::Theorem).ok();
    let c1_m = theorem.map(|t| t.c1 * m);
    let c2a = theorem.map(|t| t.c2 + params.a * b);
    Ok(MassBoundReport {
        mass: m,
        direction_factor: d,
        direction_factor_error: df.error,
        sphere_constant: c,
        sphere_constant_uncorrected: dc.sphere_below,
        lhs: d * h,
        lhs_error: d * he + h * df.error,
        kernel_term: d * j,
        kernel_error: d * je + j * df.error,
        background_term: d * params.a * g,
        background_error: d * params.a * ge + params.a * g * df.error,
        defect,
        defect_error,
        kernel_per_mass: kpm,
        background_factor: b,
        measured_holds: 0.5 * m <= kpm + params.a * b,
        c1_m,
        c2_plus_a: c2a,
        theorem_holds: c1_m.zip(c2a).map(|(l, r)| l <= r),
        signature: defect < -3.0 * defect_error,
    })
}
