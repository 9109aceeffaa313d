//! Radial interaction kernels `K(x) = k(|x|)` for the nonlocal perimeter.

mod audit;

pub use audit::{validate_conditions, AuditPlan, Condition, ConditionResult, KernelConditionReport, Verdict};

use crate::error::{Error, Result};
use crate::quadrature::pair::{Convention, PiecewiseLineKernel};
use serde::{Deserialize, Serialize};
use std::io::Read;

/// `2^{1/(N+s-1)} - 1`, the smallest admissible `epsilon`.
pub fn epsilon_min(n: usize, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("dimension", format!("N must be at least 2, got {n}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", format!("must lie in (0, 1), got {s}")));
    }
    Ok((std::f64::consts::LN_2 / (n as f64 + s - 1.0)).exp_m1())
}

/// Radial samples `(r_i, k_i)` with strictly increasing radii and positive values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTable {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::param("table", "needs matching, nonempty radius and value columns"));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("table", "radii must be positive and strictly increasing"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::param("table", "log-log interpolation needs positive finite values"));
        }
        Ok(RadialTable { radii, values })
    }

    /// Two columns `radius,value`; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let (mut radii, mut values) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parsed: Vec<std::result::Result<f64, _>> = rec.iter().map(|f| f.parse::<f64>()).collect();
            if parsed.len() != 2 {
                return Err(Error::Parse {
                    source_name: source_name.into(),
                    line: i + 1,
                    reason: format!("expected 2 columns, got {}", parsed.len()),
                });
            }
            match (&parsed[0], &parsed[1]) {
                (Ok(r), Ok(v)) => {
                    radii.push(*r);
                    values.push(*v);
                }
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        source_name: source_name.into(),
                        line: i + 1,
                        reason: "non-numeric entry".into(),
                    })
                }
            }
        }
        Self::new(radii, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn slope(&self, i: usize) -> f64 {
        if self.radii.len() < 2 {
            return 0.0;
        }
        let i = i.min(self.radii.len() - 2);
        (self.values[i + 1] / self.values[i]).ln() / (self.radii[i + 1] / self.radii[i]).ln()
    }

    fn last(&self) -> f64 {
        *self.radii.last().unwrap()
    }
}

/// What happens beyond the last tabulated radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    /// Continue the last log-log segment.
    PowerLaw,
    /// The kernel is unknown there.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KernelKind {
    /// `|x|^{-(N+s)}`.
    Fractional,
    /// `min(|x|^{-(N+s)}, cap)`.
    TruncatedFractional { cap: f64 },
    /// Log-log interpolation of samples, extrapolated below the first radius.
    Tabulated { table: RadialTable, tail: TailRule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    dimension: usize,
    s: f64,
    epsilon: f64,
    lambda: f64,
    /// Multiplies every kind.
    amplitude: f64,
    kind: KernelKind,
}

impl KernelSpec {
    pub fn new(dimension: usize, s: f64, epsilon: f64, lambda: f64, amplitude: f64, kind: KernelKind) -> Result<Self> {
        let eps_min = epsilon_min(dimension, s)?;
        if !(epsilon > eps_min) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", format!("must exceed 2^(1/(N+s-1)) - 1 = {eps_min}, got {epsilon}")));
        }
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be at least 1, got {lambda}")));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(Error::param("amplitude", format!("must be positive, got {amplitude}")));
        }
        let k = KernelSpec {
            dimension,
            s,
            epsilon,
            lambda,
            amplitude,
            kind,
        };
        if let KernelKind::TruncatedFractional { cap } = k.kind {
            let floor = amplitude * (1.0 + epsilon).powf(-k.exponent());
            if !(cap >= floor) || !cap.is_finite() {
                return Err(Error::param("cap", format!("must be at least {floor}, got {cap}")));
            }
        }
        Ok(k)
    }

    pub fn fractional(dimension: usize, s: f64, epsilon: f64) -> Result<Self> {
        Self::new(dimension, s, epsilon, 1.0, 1.0, KernelKind::Fractional)
    }

    pub fn truncated(dimension: usize, s: f64, epsilon: f64, cap: f64) -> Result<Self> {
        Self::new(dimension, s, epsilon, 1.0, 1.0, KernelKind::TruncatedFractional { cap })
    }

    pub fn tabulated(dimension: usize, s: f64, epsilon: f64, table: RadialTable, tail: TailRule) -> Result<Self> {
        Self::new(dimension, s, epsilon, 1.0, 1.0, KernelKind::Tabulated { table, tail })
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.dimension, self.s, self.epsilon, lambda, self.amplitude, self.kind)
    }

    pub fn with_amplitude(self, amplitude: f64) -> Result<Self> {
        Self::new(self.dimension, self.s, self.epsilon, self.lambda, amplitude, self.kind)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// `N + s`.
    pub fn exponent(&self) -> f64 {
        self.dimension as f64 + self.s
    }

    /// Whether `K(lambda x) = lambda^{-(N+s)} K(x)`.
    pub fn is_homogeneous(&self) -> bool {
        matches!(self.kind, KernelKind::Fractional)
    }

    /// `k(r)` for `r > 0`; `None` beyond an undefined table tail.
    pub fn radial(&self, r: f64) -> Option<f64> {
        let p = self.exponent();
        let v = match &self.kind {
            KernelKind::Fractional => r.powf(-p),
            KernelKind::TruncatedFractional { cap } => r.powf(-p).min(*cap / self.amplitude),
            KernelKind::Tabulated { table, tail } => {
                let rs = table.radii();
                let vs = table.values();
                if r > table.last() {
                    if *tail == TailRule::Undefined {
                        return None;
                    }
                    let n = rs.len() - 1;
                    vs[n] * (r / rs[n]).powf(table.slope(n))
                } else if r <= rs[0] {
                    vs[0] * (r / rs[0]).powf(table.slope(0))
                } else {
                    let i = rs.partition_point(|&x| x < r) - 1;
                    vs[i] * (r / rs[i]).powf(table.slope(i))
                }
            }
        };
        Some(self.amplitude * v)
    }

    /// `K(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::param("x", format!("expected {} coordinates", self.dimension)));
        }
        let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if r == 0.0 {
            return Err(Error::Domain("kernel is singular at the origin".into()));
        }
        self.radial(r)
            .ok_or_else(|| Error::Domain(format!("tabulated kernel undefined at radius {r}")))
    }

    /// Power-law pieces `(start, coeff, exponent)` of `k(r) r^{power}`.
    fn radial_pieces(&self, power: f64) -> Result<Vec<(f64, f64, f64)>> {
        let a = self.amplitude;
        let p = self.exponent();
        Ok(match &self.kind {
            KernelKind::Fractional => vec![(0.0, a, power - p)],
            KernelKind::TruncatedFractional { cap } => {
                let rc = (a / cap).powf(1.0 / p);
                vec![(0.0, *cap, power), (rc, a, power - p)]
            }
            KernelKind::Tabulated { table, tail } => {
                if *tail == TailRule::Undefined {
                    return Err(Error::Precondition(
                        "tabulated kernel has no tail rule; integrals over unbounded sets are undefined".into(),
                    ));
                }
                let rs = table.radii();
                let vs = table.values();
                let mut out = Vec::with_capacity(rs.len() + 1);
                let e0 = table.slope(0);
                out.push((0.0, a * vs[0] * rs[0].powf(-e0), power + e0));
                for i in 0..rs.len() {
                    let e = table.slope(i);
                    if i == 0 && e == e0 {
                        continue;
                    }
                    out.push((rs[i], a * vs[i] * rs[i].powf(-e), power + e));
                }
                out
            }
        })
    }

    /// One-dimensional density `k(r) r^{N-1+extra}` with closed-form double
    /// antiderivative.
    pub fn line_kernel(&self, convention: Convention, extra: f64) -> Result<PiecewiseLineKernel> {
        let pieces = self.radial_pieces(self.dimension as f64 - 1.0 + extra)?;
        PiecewiseLineKernel::new(&pieces, convention).map_err(Error::NonIntegrable)
    }
}
