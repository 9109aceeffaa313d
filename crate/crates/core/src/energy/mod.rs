//! The liquid-drop functional `F(E) = P_K(E) + V_alpha(E) - A R_beta(E)`,
//! interaction terms and the union decomposition identities.

mod ball;

use crate::constants::{ball_volume, sphere_area};
use crate::error::{Error, Result};
use crate::geometry::{merge_intervals, BallConfig, Line, Point, Shape, VoxelShape};
use crate::kernels::{KernelKind, KernelSpec};
use crate::quadrature::lines::{integrate_directions, integrate_line_pairs, integrate_lines};
use crate::quadrature::pair::{complement_pairs, cross_pairs, power_integral, self_pairs, Convention, LineKernel, PiecewiseLineKernel};
use crate::quadrature::{complement_double_integral, IntegralEstimate, Method, QuadratureSpec, Warning};
use serde::{Deserialize, Serialize};

pub(crate) use ball::chord_integral;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub kernel: KernelSpec,
    /// Strength of the background attraction.
    pub a: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

impl EnergyParams {
    /// `alpha = beta = 1`.
    pub fn new(kernel: KernelSpec, a: f64) -> Result<Self> {
        let p = EnergyParams {
            kernel,
            a,
            alpha: 1.0,
            beta: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_a(mut self, a: f64) -> Result<Self> {
        self.a = a;
        self.validate()?;
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.kernel.dimension()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension() as f64;
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::param("A", format!("must be finite and >= 0, got {}", self.a)));
        }
        check_alpha(self.alpha, self.dimension())?;
        if !(self.beta >= 0.0 && self.beta < n + 1.0) {
            return Err(Error::param("beta", format!("must lie in [0, {}), got {}", n + 1.0, self.beta)));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::param(
            "alpha",
            format!("|x|^-alpha is integrable on E x E only for 0 < alpha < {n}, got {alpha}"),
        ));
    }
    Ok(())
}

fn check_same_dimension(e: &Shape, n: usize) -> Result<()> {
    if e.dimension() != n {
        return Err(Error::param(
            "shape",
            format!("shape lives in R^{} but the parameters in R^{n}", e.dimension()),
        ));
    }
    Ok(())
}

fn disjoint_balls<'a>(e: &'a Shape, spec: &QuadratureSpec) -> Option<&'a BallConfig> {
    match e {
        Shape::Balls(b) if spec.exact_ball_paths && b.is_disjoint() => Some(b),
        _ => None,
    }
}

fn single_balls(b: &BallConfig) -> Vec<Shape> {
    b.balls()
        .iter()
        .map(|ball| Shape::ball(&ball.center(b.dimension()), ball.radius).expect("valid ball"))
        .collect()
}

fn quad_estimate(value: f64, error: f64, spec: &QuadratureSpec) -> IntegralEstimate {
    IntegralEstimate::from_parts(value, error + 1e-12 * value.abs(), 0, spec)
}

/// `P_K(E) = int_E int_{E^c} K(x - y)`.
pub fn perimeter(e: &Shape, params: &EnergyParams, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    params.validate()?;
    kernel_perimeter(e, &params.kernel, spec)
}

/// [`perimeter`] for a bare kernel.
pub fn kernel_perimeter(e: &Shape, kernel: &KernelSpec, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    spec.validate()?;
    check_same_dimension(e, kernel.dimension())?;
    if e.is_empty() {
        return Ok(IntegralEstimate::zero(spec));
    }
    let Some(b) = disjoint_balls(e, spec) else {
        return complement_double_integral(e, kernel, spec);
    };
    let k1 = kernel.line_kernel(Convention::Tail, 0.0)?;
    let n = b.dimension();
    let mut est = IntegralEstimate::zero(spec);
    for ball in b.balls() {
        let q = chord_integral(n, ball.radius, |l| complement_pairs(&k1, &[(0.0, l)]));
        est = est.plus(&quad_estimate(q.value, q.error, spec));
    }
    let parts = single_balls(b);
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            est = est.plus(&line_cross(&parts[i], &parts[j], &k1, spec)?.scaled(-2.0));
        }
    }
    Ok(est)
}

fn riesz_line_kernel(n: usize, alpha: f64) -> PiecewiseLineKernel {
    PiecewiseLineKernel::power(1.0, n as f64 - 1.0 - alpha, Convention::Local).expect("alpha < N")
}

/// `V_alpha(E) = 1/2 int_E int_E |x - y|^{-alpha}`.
pub fn riesz(e: &Shape, alpha: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    spec.validate()?;
    let n = e.dimension();
    check_alpha(alpha, n)?;
    let mut est = if e.is_empty() {
        IntegralEstimate::zero(spec)
    } else {
        let k1 = riesz_line_kernel(n, alpha);
        if let Some(b) = disjoint_balls(e, spec) {
            let mut est = IntegralEstimate::zero(spec);
            for ball in b.balls() {
                let q = chord_integral(n, ball.radius, |l| k1.self_pair(l));
                est = est.plus(&quad_estimate(0.5 * q.value, 0.5 * q.error, spec));
            }
            let parts = single_balls(b);
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    est = est.plus(&line_cross(&parts[i], &parts[j], &k1, spec)?);
                }
            }
            est
        } else {
            let (c, r) = e.bounding_sphere();
            let s = integrate_lines(n, &c, r, spec, 1, |line, out| {
                out[0] = 0.5 * self_pairs(&k1, &e.line_intervals(line));
            });
            IntegralEstimate::from_parts(s.values[0], s.errors[0], s.samples, spec)
        }
    };
    if alpha != 1.0 {
        est.warnings.push(Warning::Exploratory {
            detail: format!("alpha = {alpha}: nonexistence results cover alpha = 1 only"),
        });
    }
    Ok(est)
}

/// Whether the closure of `e` contains the origin.
pub(crate) fn touches_origin(e: &Shape) -> bool {
    let d = match e {
        Shape::Voxels(v) => 1e-9 * v.spacing(),
        _ => 1e-12 * e.bounding_sphere().1,
    };
    let n = e.dimension();
    (0..1usize << n).any(|corner| {
        let mut p = [0.0; 3];
        for (a, x) in p.iter_mut().enumerate().take(n) {
            *x = if corner >> a & 1 == 1 { d } else { -d };
        }
        e.contains(&p)
    })
}

/// Ray parameter at which a ray from the origin leaves the grid cells whose
/// closure contains the origin.
fn origin_cells_exit(v: &VoxelShape, dir: &Point) -> f64 {
    let h = v.spacing();
    let o = v.origin();
    let mut t = f64::INFINITY;
    for a in 0..v.dimension() {
        let k = -o[a] / h;
        let (lo, hi) = if (k - k.round()).abs() < 1e-9 {
            (o[a] + (k.round() - 1.0) * h, o[a] + (k.round() + 1.0) * h)
        } else {
            (o[a] + k.floor() * h, o[a] + (k.floor() + 1.0) * h)
        };
        if dir[a] > 0.0 {
            t = t.min(hi / dir[a]);
        } else if dir[a] < 0.0 {
            t = t.min(lo / dir[a]);
        }
    }
    t
}

/// `R_beta(E) = int_E |x|^{-beta}`.
///
/// Integrated along rays from the origin, where the radial factor has a
/// closed form; balls use a one-dimensional angular integral instead.
pub fn background(e: &Shape, beta: f64, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    spec.validate()?;
    let n = e.dimension();
    if !(beta >= 0.0 && beta < n as f64 + 1.0) {
        return Err(Error::param("beta", format!("must lie in [0, {}), got {beta}", n + 1)));
    }
    if e.is_empty() {
        return Ok(IntegralEstimate::zero(spec));
    }
    if let Some(b) = disjoint_balls(e, spec) {
        let mut est = IntegralEstimate::zero(spec);
        for ball in b.balls() {
            let d = ball.center.iter().map(|x| x * x).sum::<f64>().sqrt();
            let q = ball::ball_background(n, d, ball.radius, beta)?;
            est = est.plus(&quad_estimate(q.value, q.error, spec));
        }
        return Ok(est);
    }
    let singular = beta >= n as f64 && touches_origin(e);
    let cells = match e {
        Shape::Voxels(v) if singular => Some(v),
        _ if singular => {
            return Err(Error::NonIntegrable(format!(
                "|x|^-{beta} is not integrable near the origin, which lies in the closure of the shape"
            )))
        }
        _ => None,
    };
    let ex = n as f64 - 1.0 - beta;
    let s = integrate_directions(n, spec, 1, |dir, out| {
        let line = Line { point: [0.0; 3], dir: *dir };
        let start = cells.map_or(0.0, |v| origin_cells_exit(v, dir));
        out[0] = e
            .line_intervals(&line)
            .iter()
            .filter(|iv| iv.1 > start)
            .map(|&(a, b)| power_integral(ex, a.max(start), b))
            .sum();
    });
    let mut est = IntegralEstimate::from_parts(s.values[0], s.errors[0], s.samples, spec);
    if singular {
        est.warnings.push(Warning::SingularCell {
            detail: format!(
                "grid cells touching the origin excluded; their contribution to R_{beta} is infinite"
            ),
        });
    }
    Ok(est)
}

/// Flat record of one energy evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub dimension: usize,
    pub kernel: String,
    pub s: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub volume: f64,
    pub perimeter: f64,
    pub perimeter_error: f64,
    pub riesz: f64,
    pub riesz_error: f64,
    pub background: f64,
    pub background_error: f64,
    pub total: f64,
    pub total_error: f64,
    pub method: Method,
    pub seed: u64,
    pub samples: usize,
    /// Warning kinds, `;`-separated.
    pub warnings: String,
}

pub(crate) fn kernel_name(k: &KernelSpec) -> &'static str {
    match k.kind() {
        KernelKind::Fractional => "fractional",
        KernelKind::TruncatedFractional { .. } => "truncated-fractional",
        KernelKind::Tabulated { .. } => "tabulated",
    }
}

impl EnergyReport {
    /// Assemble `P + V - A R` from its terms.
    pub fn from_terms(
        params: &EnergyParams,
        volume: f64,
        p: &IntegralEstimate,
        v: &IntegralEstimate,
        r: &IntegralEstimate,
        spec: &QuadratureSpec,
    ) -> Self {
        let k = &params.kernel;
        let mut warnings: Vec<String> = Vec::new();
        for w in p.warnings.iter().chain(&v.warnings).chain(&r.warnings) {
            let s = match w {
                Warning::PaddingTooSmall { tail_fraction } => format!("padding-too-small({tail_fraction:.3})"),
                Warning::SingularCell { .. } => "singular-cell".to_string(),
                Warning::Exploratory { .. } => "exploratory".to_string(),
            };
            if !warnings.contains(&s) {
                warnings.push(s);
            }
        }
        EnergyReport {
            dimension: k.dimension(),
            kernel: kernel_name(k).to_string(),
            s: k.s(),
            epsilon: k.epsilon(),
            lambda: k.lambda(),
            a: params.a,
            alpha: params.alpha,
            beta: params.beta,
            volume,
            perimeter: p.value,
            perimeter_error: p.error,
            riesz: v.value,
            riesz_error: v.error,
            background: r.value,
            background_error: r.error,
            total: p.value + v.value - params.a * r.value,
            total_error: (p.error.powi(2) + v.error.powi(2) + (params.a * r.error).powi(2)).sqrt(),
            method: spec.method,
            seed: spec.seed,
            samples: p.samples + v.samples + r.samples,
            warnings: warnings.join(";"),
        }
    }
}

/// `F_(K,A)(E)` with `alpha`, `beta` from the parameters.
pub fn total_energy(e: &Shape, params: &EnergyParams, spec: &QuadratureSpec) -> Result<EnergyReport> {
    params.validate()?;
    check_same_dimension(e, params.dimension())?;
    let volume = e.volume()?;
    let p = kernel_perimeter(e, &params.kernel, spec)?;
    let v = riesz(e, params.alpha, spec)?;
    let r = if params.a == 0.0 {
        IntegralEstimate::zero(spec)
    } else {
        background(e, params.beta, spec)?
    };
    Ok(EnergyReport::from_terms(params, volume, &p, &v, &r, spec))
}

/// Pair function in [`interaction`].
#[derive(Debug, Clone, Copy)]
pub enum Coupling<'a> {
    Kernel(&'a KernelSpec),
    Riesz { alpha: f64 },
}

impl Coupling<'_> {
    fn line_kernel(&self, n: usize) -> Result<PiecewiseLineKernel> {
        match self {
            Coupling::Kernel(k) => {
                if k.dimension() != n {
                    return Err(Error::param("kernel", "kernel and shape dimensions differ"));
                }
                k.line_kernel(Convention::Tail, 0.0)
                    .or_else(|_| k.line_kernel(Convention::Local, 0.0))
            }
            Coupling::Riesz { alpha } => {
                check_alpha(*alpha, n)?;
                Ok(riesz_line_kernel(n, *alpha))
            }
        }
    }
}

const OVERLAP_TOL: f64 = 1e-9;

fn overlap_error(volume: f64) -> Error {
    Error::Precondition(format!("the two sets overlap in a set of volume about {volume:.3e}"))
}

/// `int_U int_W k(|x - y|)` over lines meeting both bounding spheres.
fn line_cross(u: &Shape, w: &Shape, k1: &PiecewiseLineKernel, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    if u.is_empty() || w.is_empty() {
        return Ok(IntegralEstimate::zero(spec));
    }
    let n = u.dimension();
    let (su, sw) = (u.bounding_sphere(), w.bounding_sphere());
    let r = su.1.min(sw.1);
    let per_line = |line: &Line, out: &mut [f64]| {
        let iu = u.line_intervals(line);
        if iu.is_empty() {
            return;
        }
        let iw = w.line_intervals(line);
        let (v, ov) = cross_pairs(k1, &iu, &iw);
        out[0] = v;
        out[1] = ov;
    };
    let s = match spec.method {
        Method::MonteCarlo => integrate_line_pairs(n, (&su.0, su.1), (&sw.0, sw.1), spec, 2, per_line),
        Method::TensorMidpoint => {
            let (c, r) = if su.1 <= sw.1 { su } else { sw };
            integrate_lines(n, &c, r, spec, 2, per_line)
        }
    };
    let overlap = s.values[1] / (0.5 * sphere_area(n));
    if overlap > OVERLAP_TOL * ball_volume(n) * r.powi(n as i32) {
        return Err(overlap_error(overlap));
    }
    Ok(IntegralEstimate::from_parts(s.values[0], s.errors[0], s.samples, spec))
}

/// `int_U int_W g(x - y)` for sets meeting in a null set.
pub fn interaction(u: &Shape, w: &Shape, g: Coupling<'_>, spec: &QuadratureSpec) -> Result<IntegralEstimate> {
    spec.validate()?;
    if u.dimension() != w.dimension() {
        return Err(Error::param("shape", "shapes of different dimension"));
    }
    let k1 = g.line_kernel(u.dimension())?;
    line_cross(u, w, &k1, spec)
}

/// Residual of a union decomposition identity, with the terms evaluated on
/// one shared set of lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub residual: f64,
    /// Errors of the individual terms combined in quadrature.
    pub combined_error: f64,
    /// Standard error of the residual itself under the shared sampling.
    pub residual_error: f64,
    /// Term estimates `[value, error]`: `U`, `W`, `U ∪ W`, interaction.
    pub terms: [[f64; 2]; 4],
}

fn overlap_length(u: &[(f64, f64)], w: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for p in u {
        for q in w {
            total += (p.1.min(q.1) - p.0.max(q.0)).max(0.0);
        }
    }
    total
}

fn decomposition<F>(u: &Shape, w: &Shape, spec: &QuadratureSpec, per_line: F) -> Result<DecompositionCheck>
where
    F: Fn(&[(f64, f64)], &[(f64, f64)], &[(f64, f64)]) -> [f64; 5] + Sync,
{
    spec.validate()?;
    if u.dimension() != w.dimension() {
        return Err(Error::param("shape", "shapes of different dimension"));
    }
    if u.is_empty() || w.is_empty() {
        return Ok(DecompositionCheck {
            residual: 0.0,
            combined_error: 0.0,
            residual_error: 0.0,
            terms: [[0.0; 2]; 4],
        });
    }
    let n = u.dimension();
    let both = Shape::union(vec![u.clone(), w.clone()])?;
    let (c, r) = both.bounding_sphere();
    let s = integrate_lines(n, &c, r, spec, 6, |line: &Line, out| {
        let iu = u.line_intervals(line);
        let iw = w.line_intervals(line);
        if iu.is_empty() && iw.is_empty() {
            return;
        }
        let joint = merge_intervals(iu.iter().chain(&iw).copied().collect());
        let t = per_line(&iu, &iw, &joint);
        out[..5].copy_from_slice(&t);
        out[5] = overlap_length(&iu, &iw);
    });
    let overlap = s.values[5] / (0.5 * sphere_area(n));
    if overlap > OVERLAP_TOL * ball_volume(n) * r.powi(n as i32) {
        return Err(overlap_error(overlap));
    }
    let terms = [0, 1, 2, 3].map(|i| [s.values[i], s.errors[i]]);
    Ok(DecompositionCheck {
        residual: s.values[4],
        combined_error: s.errors[..4].iter().map(|e| e * e).sum::<f64>().sqrt(),
        residual_error: s.errors[4],
        terms,
    })
}

/// `P_K(U) + P_K(W) - P_K(U ∪ W) - 2 int_U int_W K`.
pub fn check_perimeter_decomposition(u: &Shape, w: &Shape, kernel: &KernelSpec, spec: &QuadratureSpec) -> Result<DecompositionCheck> {
    check_same_dimension(u, kernel.dimension())?;
    let k1 = kernel.line_kernel(Convention::Tail, 0.0)?;
    let out = decomposition(u, w, spec, |iu, iw, joint| {
        let pu = complement_pairs(&k1, iu);
        let pw = complement_pairs(&k1, iw);
        let puw = complement_pairs(&k1, joint);
        let i = cross_pairs(&k1, iu, iw).0;
        [pu, pw, puw, i, pu + pw - puw - 2.0 * i]
    })?;
    Ok(out)
}

/// `V_1(U ∪ W) - V_1(U) - V_1(W) - int_U int_W |x - y|^{-1}`.
pub fn check_riesz_decomposition(u: &Shape, w: &Shape, spec: &QuadratureSpec) -> Result<DecompositionCheck> {
    let k1 = riesz_line_kernel(u.dimension(), 1.0);
    decomposition(u, w, spec, |iu, iw, joint| {
        let vu = 0.5 * self_pairs(&k1, iu);
        let vw = 0.5 * self_pairs(&k1, iw);
        let vuw = 0.5 * self_pairs(&k1, joint);
        let i = cross_pairs(&k1, iu, iw).0;
        [vu, vw, vuw, i, vuw - vu - vw - i]
    })
}

/// How one term changes under `E -> lambda E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTerm {
    pub base: f64,
    pub scaled: f64,
    pub ratio: f64,
    /// `log(ratio) / log(lambda)`; absent for `lambda = 1`.
    pub exponent: Option<f64>,
    pub exponent_error: Option<f64>,
    pub expected: f64,
}

impl ScalingTerm {
    fn new(a: &IntegralEstimate, b: &IntegralEstimate, lambda: f64, expected: f64) -> Self {
        let ratio = if a.value == b.value { 1.0 } else { b.value / a.value };
        let (exponent, exponent_error) = if lambda == 1.0 {
            (None, None)
        } else {
            let l = lambda.ln();
            let rel = a.error / a.value.abs() + b.error / b.value.abs();
            (Some(ratio.ln() / l), Some(rel / l.abs()))
        };
        ScalingTerm {
            base: a.value,
            scaled: b.value,
            ratio,
            exponent,
            exponent_error,
            expected,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: f64,
    pub perimeter: ScalingTerm,
    pub riesz: ScalingTerm,
    pub background: ScalingTerm,
    /// Whether the kernel is homogeneous, so that `N - s` is exact for the perimeter.
    pub perimeter_exact: bool,
    /// Volume change caused by resampling voxel shapes.
    pub resampling_error: f64,
}

/// Per-term scaling exponents between `E` and `lambda E`.
pub fn scaling_report(e: &Shape, lambda: f64, params: &EnergyParams, spec: &QuadratureSpec) -> Result<ScalingReport> {
    params.validate()?;
    check_same_dimension(e, params.dimension())?;
    let (scaled, resampling_error) = e.scale(lambda)?;
    let n = params.dimension() as f64;
    let k = &params.kernel;
    let term = |f: &dyn Fn(&Shape) -> Result<IntegralEstimate>, expected: f64| -> Result<ScalingTerm> {
        Ok(ScalingTerm::new(&f(e)?, &f(&scaled)?, lambda, expected))
    };
    Ok(ScalingReport {
        lambda,
        perimeter: term(&|x| kernel_perimeter(x, k, spec), n - k.s())?,
        riesz: term(&|x| riesz(x, params.alpha, spec), 2.0 * n - params.alpha)?,
        background: term(&|x| background(x, params.beta, spec), n - params.beta)?,
        perimeter_exact: k.is_homogeneous(),
        resampling_error,
    })
}

#[cfg(test)]
mod tests;
