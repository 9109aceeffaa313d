//! Critical masses above which the constrained minimisation has no bounded
//! solution.
//!
//! ```text
//! m_c = (C2 + A) / C1,        C1 = 1/2 - (1+eps)^{-k},  C2 = |S^{N-1}| (1+eps)^{1-s} / (1-s)
//! phi(x) = C1 x^{1+p} - C2 x^p - A C3,   p = (beta - 1) / N
//! ```
//!
//! The exponent `k` is `N+s-1` in the main theorem and `N+1-s` in the
//! appendix; both are available through [`Convention`].

use crate::constants::DimensionConstants;
use crate::error::{Error, Result};
use crate::kernels::epsilon_min;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Exponent `N + s - 1`.
    #[default]
    Theorem,
    /// Exponent `N + 1 - s`.
    Appendix,
}

impl Convention {
    pub fn exponent(self, n: usize, s: f64) -> f64 {
        match self {
            Convention::Theorem => n as f64 + s - 1.0,
            Convention::Appendix => n as f64 + 1.0 - s,
        }
    }
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Convention::Theorem => "theorem",
            Convention::Appendix => "appendix",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    ClosedForm,
    Root,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootDiagnostics {
    pub bracket: (f64, f64),
    pub bracket_steps: usize,
    pub iterations: usize,
    pub residual: f64,
    /// `max(C1 m^{1+p}, C2 m^p, A C3)`, the size of the terms of `phi`.
    pub scale: f64,
    pub phi_at_2m: f64,
    pub phi_at_10m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub dimension: usize,
    pub s: f64,
    pub epsilon: f64,
    pub a: f64,
    pub beta: f64,
    pub convention: Convention,
    pub kind: ThresholdKind,
    /// `m_c` for the closed form, `m_p` for the root.
    pub mass: f64,
    pub constants: Constants,
    pub diagnostics: Option<RootDiagnostics>,
}

fn check_inputs(n: usize, s: f64, a: f64) -> Result<()> {
    crate::geometry::check_dimension(n)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::param("s", format!("must lie in (0, 1), got {s}")));
    }
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::param("A", format!("must be finite and >= 0, got {a}")));
    }
    Ok(())
}

/// `C1, C2, C3, p`.
pub fn general_constants(n: usize, s: f64, epsilon: f64, beta: f64, convention: Convention) -> Result<Constants> {
    check_inputs(n, s, 0.0)?;
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param("epsilon", format!("must be positive, got {epsilon}")));
    }
    let nf = n as f64;
    if !(beta >= 0.0 && beta < nf + 1.0) {
        return Err(Error::param("beta", format!("must lie in [0, {}), got {beta}", nf + 1.0)));
    }
    let k = convention.exponent(n, s);
    let c1 = 0.5 - (1.0 + epsilon).powf(-k);
    let degenerate = c1 <= 0.0 || (convention == Convention::Theorem && epsilon <= epsilon_min(n, s)?);
    if degenerate {
        return Err(Error::DegeneratePrefactor {
            exponent: k,
            value: c1.min(0.0),
        });
    }
    let d = DimensionConstants::new(n);
    let c2 = d.sphere * (1.0 + epsilon).powf(1.0 - s) / (1.0 - s);
    let p = (beta - 1.0) / nf;
    let c3 = if beta == 1.0 {
        1.0
    } else {
        d.sphere * d.ball.powf(-1.0 + p) / (nf + 1.0 - beta)
    };
    Ok(Constants { c1, c2, c3, p })
}

/// Closed-form critical mass of the main theorem.
pub fn critical_mass(n: usize, s: f64, epsilon: f64, a: f64) -> Result<ThresholdRecord> {
    check_inputs(n, s, a)?;
    let c = general_constants(n, s, epsilon, 1.0, Convention::Theorem)?;
    Ok(ThresholdRecord {
        dimension: n,
        s,
        epsilon,
        a,
        beta: 1.0,
        convention: Convention::Theorem,
        kind: ThresholdKind::ClosedForm,
        mass: (c.c2 + a) / c.c1,
        constants: c,
        diagnostics: None,
    })
}

/// `C1 x^{1+p} - C2 x^p - A C3`.
pub fn phi(x: f64, c: &Constants, a: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("phi is defined for x > 0, got {x}")));
    }
    let xp = x.powf(c.p);
    Ok(xp * (c.c1 * x - c.c2) - a * c.c3)
}

/// Bracketing and stopping rules of [`general_critical_mass_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Initial lower bracket, divided by 10 until `phi < 0`.
    pub lower_start: f64,
    /// Initial upper bracket, doubled until `phi > 0`.
    pub upper_start: f64,
    pub max_steps: usize,
    pub rel_width: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            lower_start: 1e-6,
            upper_start: 1.0,
            max_steps: 200,
            rel_width: 1e-12,
        }
    }
}

/// Root `m_p` of `phi` by bracketed bisection.
pub fn general_critical_mass(n: usize, s: f64, epsilon: f64, a: f64, beta: f64, convention: Convention) -> Result<ThresholdRecord> {
    general_critical_mass_with(n, s, epsilon, a, beta, convention, RootOptions::default())
}

pub fn general_critical_mass_with(
    n: usize,
    s: f64,
    epsilon: f64,
    a: f64,
    beta: f64,
    convention: Convention,
    opts: RootOptions,
) -> Result<ThresholdRecord> {
    check_inputs(n, s, a)?;
    let c = general_constants(n, s, epsilon, beta, convention)?;
    let f = |x: f64| phi(x, &c, a);

    let mut lo = opts.lower_start;
    let mut steps = 0;
    let mut flo = f(lo)?;
    while flo >= 0.0 {
        steps += 1;
        if steps > opts.max_steps || lo < f64::MIN_POSITIVE {
            return Err(Error::Bracket { steps, x: lo, phi: flo });
        }
        lo /= 10.0;
        flo = f(lo)?;
    }
    let mut hi = opts.upper_start.max(lo);
    let mut fhi = f(hi)?;
    let mut up = 0;
    while fhi <= 0.0 {
        up += 1;
        if up > opts.max_steps {
            return Err(Error::Bracket { steps: up, x: hi, phi: fhi });
        }
        lo = lo.max(hi);
        hi *= 2.0;
        fhi = f(hi)?;
    }
    let bracket = (lo, hi);

    let mut iterations = 0;
    while hi - lo > opts.rel_width * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let m = 0.5 * (lo + hi);
    let residual = f(m)?;
    let scale = (c.c1 * m.powf(1.0 + c.p)).max(c.c2 * m.powf(c.p)).max(a * c.c3);
    let phi_at_2m = f(2.0 * m)?;
    let phi_at_10m = f(10.0 * m)?;
    if !(phi_at_2m > 0.0 && phi_at_10m > 0.0) {
        return Err(Error::Precondition(format!(
            "phi is not positive beyond the root m = {m:e} (phi(2m) = {phi_at_2m:e}, phi(10m) = {phi_at_10m:e})"
        )));
    }
    Ok(ThresholdRecord {
        dimension: n,
        s,
        epsilon,
        a,
        beta,
        convention,
        kind: ThresholdKind::Root,
        mass: m,
        constants: c,
        diagnostics: Some(RootDiagnostics {
            bracket,
            bracket_steps: steps + up,
            iterations,
            residual,
            scale,
            phi_at_2m,
            phi_at_10m,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ball_volume, sphere_area};

    // 30-digit evaluations of the closed form
    const M_C: f64 = 224.495_699_389_689_636;
    const SLOPE: f64 = 7.293_274_112_702_414_31;
    const C1: f64 = 0.137_112_630_698_788_430;

    #[test]
    fn closed_form_reference() {
        let r = critical_mass(3, 0.5, 0.5, 0.0).unwrap();
        assert!((r.mass - M_C).abs() < 1e-10, "{}", r.mass);
        assert!((r.constants.c1 - C1).abs() < 1e-15);
        let r10 = critical_mass(3, 0.5, 0.5, 10.0).unwrap();
        assert!((r10.mass - r.mass - 10.0 * SLOPE).abs() < 1e-10);
    }

    #[test]
    fn degenerate_prefactor() {
        let e = epsilon_min(3, 0.5).unwrap();
        assert!(matches!(critical_mass(3, 0.5, e, 0.0), Err(Error::DegeneratePrefactor { .. })));
        assert!(matches!(critical_mass(3, 0.5, 0.25, 0.0), Err(Error::DegeneratePrefactor { .. })));
        assert!(critical_mass(3, 1.0, 0.5, 0.0).is_err());
        // the appendix exponent N+1-s is larger, so the same epsilon can pass
        assert!(general_constants(3, 0.5, 0.25, 1.0, Convention::Appendix).is_ok());
    }

    #[test]
    fn c3_values() {
        for n in [2usize, 3] {
            let c = general_constants(n, 0.5, 1.0, 1.0, Convention::Theorem).unwrap();
            assert_eq!(c.c3, 1.0);
            assert_eq!(c.p, 0.0);
            // the general formula at beta = 1 reduces to 1 as well
            let direct = sphere_area(n) * ball_volume(n).powf(-1.0) / n as f64;
            assert!((direct - 1.0).abs() < 1e-15);
        }
        let c = general_constants(3, 0.5, 0.5, 0.0, Convention::Theorem).unwrap();
        assert!((c.p + 1.0 / 3.0).abs() < 1e-15);
        let oracle = 4.0 * std::f64::consts::PI * (4.0 * std::f64::consts::PI / 3.0).powf(-4.0 / 3.0) / 4.0;
        assert!((c.c3 - oracle).abs() < 1e-14);
    }

    #[test]
    fn phi_shape() {
        let c = Constants { c1: 2.0, c2: 3.0, c3: 1.0, p: 0.0 };
        assert!(phi((3.0 + 0.5) / 2.0, &c, 0.5).unwrap().abs() < 1e-15);
        let c = Constants { c1: 2.0, c2: 3.0, c3: 1.0, p: 0.5 };
        assert!((phi(1e-14, &c, 0.7).unwrap() + 0.7).abs() < 1e-6);
        assert!(phi(1e6, &c, 0.7).unwrap() > 0.0);
        assert!(phi(0.0, &c, 0.7).is_err());
    }

    #[test]
    fn beta_one_root_matches_closed_form() {
        for a in [0.0, 1.0, 10.0] {
            let r = general_critical_mass(3, 0.5, 0.5, a, 1.0, Convention::Theorem).unwrap();
            let m = critical_mass(3, 0.5, 0.5, a).unwrap().mass;
            assert!((r.mass - m).abs() <= 1e-12 * m, "{} vs {m}", r.mass);
            let d = r.diagnostics.unwrap();
            assert!(d.residual.abs() <= 1e-10 * d.scale);
        }
    }

    #[test]
    fn beta_zero_root_and_grid_scan() {
        let r = general_critical_mass(3, 0.5, 0.5, 1.0, 0.0, Convention::Theorem).unwrap();
        let d = r.diagnostics.clone().unwrap();
        assert!(d.residual.abs() <= 1e-10 * d.scale);
        assert!(d.phi_at_2m > 0.0);
        // independent scan: the sign change on a fine log grid brackets the same root
        let c = r.constants;
        let xs: Vec<f64> = (0..=20_000).map(|i| 10f64.powf(-3.0 + 7.0 * i as f64 / 20_000.0)).collect();
        let k = xs.windows(2).position(|w| phi(w[0], &c, 1.0).unwrap() < 0.0 && phi(w[1], &c, 1.0).unwrap() >= 0.0).unwrap();
        assert!(xs[k] <= r.mass && r.mass <= xs[k + 1]);
    }

    #[test]
    fn zero_background_factorises() {
        let r = general_critical_mass(3, 0.5, 0.5, 0.0, 2.5, Convention::Appendix).unwrap();
        let c = r.constants;
        assert!((r.mass - c.c2 / c.c1).abs() < 1e-12 * r.mass);
    }

    #[test]
    fn bracket_start_does_not_move_the_root() {
        let a = general_critical_mass(2, 0.3, 1.0, 2.0, 0.4, Convention::Theorem).unwrap();
        let opts = RootOptions {
            lower_start: 1e-7,
            upper_start: 10.0,
            ..Default::default()
        };
        let b = general_critical_mass_with(2, 0.3, 1.0, 2.0, 0.4, Convention::Theorem, opts).unwrap();
        assert!((a.mass - b.mass).abs() < 1e-10 * a.mass);
    }
}
