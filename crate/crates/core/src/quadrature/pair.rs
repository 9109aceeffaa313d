//! Exact double integrals of a radial kernel over pairs of intervals on a line.
//!
//! Along a line, any double integral of a radial kernel `k(|x-y|)` over two
//! sets reduces to `int int k1(|t-t'|) dt dt'` over unions of intervals, where
//! `k1(r) = k(r) r^{N-1}` carries the polar Jacobian. With a double
//! antiderivative `G'' = k1`, the integral over ordered disjoint intervals
//! `[a1,b1] <= [a2,b2]` is
//!
//! ```text
//! G(b2-a1) - G(a2-a1) - G(b2-b1) + G(a2-b1)
//! ```
//!
//! Kernels used here are piecewise power laws `k1(r) = c_j r^{e_j}` on
//! `[r_j, r_{j+1})`, so `G` has a closed form on every piece.

use super::one_d::{GL8_NODES, GL8_WEIGHTS};

/// A half-open interval `[start, end)` on a line; either end may be infinite.
pub type Interval = (f64, f64);

/// Normalisation of the double antiderivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `G'(inf) = 0`, `G(0) = 0`. Needs `k1` integrable at infinity and
    /// `int_0 T < inf` near the origin; used for complement integrals.
    Tail,
    /// `G(0) = G'(0) = 0`. Needs `k1` integrable at the origin; used for
    /// self-interactions of bounded sets.
    Local,
}

/// One-dimensional kernel `k1` with a closed-form double antiderivative.
pub trait LineKernel: Send + Sync {
    fn density(&self, r: f64) -> f64;
    /// Double antiderivative, normalised by the kernel's convention.
    fn antiderivative2(&self, r: f64) -> f64;
    /// `int_0^L int_0^L k1(|t-t'|) dt dt'` (infinite if `k1` is not integrable at 0).
    fn self_pair(&self, len: f64) -> f64;
    /// Whether unbounded intervals may appear in `pair`.
    fn allows_unbounded(&self) -> bool;
}

/// `int_a^b v^e dv` for `0 <= a <= b <= inf`.
pub(crate) fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let k = e + 1.0;
    if b.is_infinite() {
        if k >= 0.0 || a == 0.0 {
            return f64::INFINITY;
        }
        return -a.powf(k) / k;
    }
    if a == 0.0 {
        if k <= 0.0 {
            return f64::INFINITY;
        }
        return b.powf(k) / k;
    }
    let log_ratio = (b / a).ln();
    if (k * log_ratio).abs() < 1e-14 {
        return a.powf(k) * log_ratio;
    }
    a.powf(k) * (k * log_ratio).exp_m1() / k
}

/// Piecewise power-law line kernel.
#[derive(Debug, Clone)]
pub struct PiecewiseLineKernel {
    starts: Vec<f64>,
    coeffs: Vec<f64>,
    exps: Vec<f64>,
    convention: Convention,
    // Tail: T(r_j) = int_{r_j}^inf k1. Local: F(r_j) = int_0^{r_j} k1.
    first: Vec<f64>,
    // G(r_j)
    second: Vec<f64>,
}

impl PiecewiseLineKernel {
    /// Build from segments `(start, coeff, exponent)`; the first start must be 0
    /// and the last segment extends to infinity.
    pub fn new(segments: &[(f64, f64, f64)], convention: Convention) -> Result<Self, String> {
        if segments.is_empty() || segments[0].0 != 0.0 {
            return Err("first segment must start at r = 0".into());
        }
        if segments.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err("segment starts must be strictly increasing".into());
        }
        let starts: Vec<f64> = segments.iter().map(|s| s.0).collect();
        let coeffs: Vec<f64> = segments.iter().map(|s| s.1).collect();
        let exps: Vec<f64> = segments.iter().map(|s| s.2).collect();
        let m = segments.len();
        let end = |j: usize| if j + 1 < m { starts[j + 1] } else { f64::INFINITY };
        let mut first = vec![0.0; m];
        let mut second = vec![0.0; m];
        match convention {
            Convention::Tail => {
                if exps[m - 1] >= -1.0 && coeffs[m - 1] != 0.0 {
                    return Err(format!(
                        "line density ~ r^{} is not integrable at infinity",
                        exps[m - 1]
                    ));
                }
                if exps[0] <= -2.0 && coeffs[0] != 0.0 {
                    return Err(format!(
                        "line density ~ r^{} is too singular at the origin",
                        exps[0]
                    ));
                }
                // tail integrals at segment starts, from the top down
                let mut t_next = 0.0;
                for j in (1..m).rev() {
                    let t = t_next + coeffs[j] * power_integral(exps[j], starts[j], end(j));
                    first[j] = t;
                    t_next = t;
                }
                first[0] = if exps[0] > -1.0 {
                    t_next + coeffs[0] * power_integral(exps[0], 0.0, end(0))
                } else {
                    f64::INFINITY
                };
                // G(r_j) = -int_0^{r_j} T
                let mut g = 0.0;
                for j in 0..m - 1 {
                    let t_end = first[j + 1];
                    let a = starts[j];
                    let x = end(j);
                    let inner = t_end * (x - a) + coeffs[j] * tail_q(exps[j], a, x, x);
                    g -= inner;
                    second[j + 1] = g;
                }
            }
            Convention::Local => {
                if exps[0] <= -1.0 && coeffs[0] != 0.0 {
                    return Err(format!(
                        "line density ~ r^{} is not integrable at the origin",
                        exps[0]
                    ));
                }
                let mut f_acc = 0.0;
                let mut g_acc = 0.0;
                for j in 0..m - 1 {
                    let a = starts[j];
                    let x = end(j);
                    let c = coeffs[j];
                    let e = exps[j];
                    g_acc += f_acc * (x - a) + c * (x * power_integral(e, a, x) - power_integral(e + 1.0, a, x));
                    f_acc += c * power_integral(e, a, x);
                    first[j + 1] = f_acc;
                    second[j + 1] = g_acc;
                }
            }
        }
        Ok(PiecewiseLineKernel {
            starts,
            coeffs,
            exps,
            convention,
            first,
            second,
        })
    }

    /// Single power law `c r^e` on `(0, inf)`.
    pub fn power(coeff: f64, exponent: f64, convention: Convention) -> Result<Self, String> {
        Self::new(&[(0.0, coeff, exponent)], convention)
    }

    fn segment(&self, r: f64) -> usize {
        match self.starts.binary_search_by(|s| s.partial_cmp(&r).unwrap()) {
            Ok(j) => j,
            Err(j) => j - 1,
        }
    }

    fn segment_end(&self, j: usize) -> f64 {
        self.starts.get(j + 1).copied().unwrap_or(f64::INFINITY)
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }
}

// int_a^x int_u^b v^e dv du  (a <= x <= b, b may be infinite)
fn tail_q(e: f64, a: f64, x: f64, b: f64) -> f64 {
    let head = power_integral(e + 1.0, a, x) - if a == 0.0 { 0.0 } else { a * power_integral(e, a, x) };
    let rest = if x < b { (x - a) * power_integral(e, x, b) } else { 0.0 };
    head + rest
}

impl LineKernel for PiecewiseLineKernel {
    fn density(&self, r: f64) -> f64 {
        let j = self.segment(r);
        self.coeffs[j] * r.powf(self.exps[j])
    }

    fn antiderivative2(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let j = self.segment(r);
        let a = self.starts[j];
        let c = self.coeffs[j];
        let e = self.exps[j];
        match self.convention {
            Convention::Tail => {
                let b = self.segment_end(j);
                let t_end = if b.is_infinite() { 0.0 } else { self.first[j + 1] };
                self.second[j] - (t_end * (r - a) + c * tail_q(e, a, r, b))
            }
            Convention::Local => {
                self.second[j]
                    + self.first[j] * (r - a)
                    + c * (r * power_integral(e, a, r) - power_integral(e + 1.0, a, r))
            }
        }
    }

    fn self_pair(&self, len: f64) -> f64 {
        if len <= 0.0 {
            return 0.0;
        }
        match self.convention {
            Convention::Local => 2.0 * self.antiderivative2(len),
            Convention::Tail => {
                let t0 = self.first[0];
                if t0.is_infinite() {
                    f64::INFINITY
                } else {
                    // G_local(L) = G(L) - G(0) - L G'(0), with G'(0) = -T(0)
                    2.0 * (self.antiderivative2(len) + len * t0)
                }
            }
        }
    }

    fn allows_unbounded(&self) -> bool {
        self.convention == Convention::Tail
    }
}

/// `int_I int_J k1(|t-t'|)` for ordered intervals `I <= J` (`b1 <= a2`).
///
/// `a1` may be `-inf` and `b2` may be `+inf` when the kernel allows it.
pub fn pair_integral(k: &dyn LineKernel, i: Interval, j: Interval) -> f64 {
    let (a1, b1) = i;
    let (a2, b2) = j;
    if !(b1 > a1) || !(b2 > a2) {
        return 0.0;
    }
    let gap = (a2 - b1).max(0.0);
    let l1 = b1 - a1;
    let l2 = b2 - a2;
    if l1.is_finite() && l2.is_finite() && gap > 4.0 * (l1 + l2) {
        return far_pair(k, i, j);
    }
    let g = |r: f64| k.antiderivative2(r);
    let mut total = g(gap);
    if l1.is_finite() {
        total -= g(a2 - a1);
    }
    if l2.is_finite() {
        total -= g(b2 - b1);
    }
    if l1.is_finite() && l2.is_finite() {
        total += g(b2 - a1);
    }
    total
}

fn far_pair(k: &dyn LineKernel, (a1, b1): Interval, (a2, b2): Interval) -> f64 {
    let (c1, h1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
    let (c2, h2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
    let mut s = 0.0;
    for (x, wx) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
        let t = c1 + h1 * x;
        for (y, wy) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            let u = c2 + h2 * y;
            s += wx * wy * k.density(u - t);
        }
    }
    s * h1 * h2
}

/// `int_{E} int_{R \ E} k1` for a sorted, disjoint, bounded interval union `E`.
pub fn complement_pairs(k: &dyn LineKernel, set: &[Interval]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    let n = set.len();
    for (idx, &piece) in set.iter().enumerate() {
        // gaps to the left of `piece`
        for g in 0..=idx {
            let gap = (if g == 0 { f64::NEG_INFINITY } else { set[g - 1].1 }, set[g].0);
            total += pair_integral(k, gap, piece);
        }
        // gaps to the right
        for g in idx..n {
            let gap = (set[g].1, if g + 1 == n { f64::INFINITY } else { set[g + 1].0 });
            total += pair_integral(k, piece, gap);
        }
    }
    total
}

/// Same as [`complement_pairs`], split into the part of the complement inside
/// `[lo, hi]` and the part outside it. `lo <= inf E` and `sup E <= hi` required.
pub fn complement_pairs_split(k: &dyn LineKernel, set: &[Interval], lo: f64, hi: f64) -> (f64, f64) {
    if set.is_empty() {
        return (0.0, 0.0);
    }
    let n = set.len();
    let mut near = 0.0;
    let mut tail = 0.0;
    for (idx, &piece) in set.iter().enumerate() {
        for g in 0..=idx {
            if g == 0 {
                near += pair_integral(k, (lo, set[0].0), piece);
                tail += pair_integral(k, (f64::NEG_INFINITY, lo), piece);
            } else {
                near += pair_integral(k, (set[g - 1].1, set[g].0), piece);
            }
        }
        for g in idx..n {
            if g + 1 == n {
                near += pair_integral(k, piece, (set[n - 1].1, hi));
                tail += pair_integral(k, piece, (hi, f64::INFINITY));
            } else {
                near += pair_integral(k, piece, (set[g].1, set[g + 1].0));
            }
        }
    }
    (near, tail)
}

/// `int_E int_E k1` for a sorted disjoint bounded union `E`.
pub fn self_pairs(k: &dyn LineKernel, set: &[Interval]) -> f64 {
    let mut total = 0.0;
    for (i, &p) in set.iter().enumerate() {
        total += k.self_pair(p.1 - p.0);
        for &q in &set[i + 1..] {
            total += 2.0 * pair_integral(k, p, q);
        }
    }
    total
}

/// `int_U int_W k1` for two sorted unions that overlap only in null sets.
///
/// Returns the integral and the total overlap length found (which should be
/// zero up to rounding when the precondition holds).
pub fn cross_pairs(k: &dyn LineKernel, u: &[Interval], w: &[Interval]) -> (f64, f64) {
    let mut total = 0.0;
    let mut overlap = 0.0;
    for &p in u {
        for &q in w {
            let (first, second) = if p.0 <= q.0 { (p, q) } else { (q, p) };
            if second.0 < first.1 {
                let ov = first.1.min(second.1) - second.0;
                overlap += ov;
                // integrate only the non-overlapping remainder of the later piece
                if second.1 > first.1 {
                    total += pair_integral(k, first, (first.1, second.1));
                }
            } else {
                total += pair_integral(k, first, second);
            }
        }
    }
    (total, overlap)
}
