//! Competitor families: one ball against two balls of the same total mass.

mod anneal;

pub use anneal::{voxel_local_search, AnnealOptions, AnnealResult, AnnealStep};

use crate::constants::ball_volume;
use crate::energy::{interaction, total_energy, Coupling, EnergyParams, EnergyReport};
use crate::error::{Error, Result};
use crate::geometry::{ball_of_volume, Shape};
use crate::quadrature::QuadratureSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn radius(n: usize, m: f64) -> f64 {
    (m / ball_volume(n)).powf(1.0 / n as f64)
}

fn check_mass(name: &'static str, m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::param(name, format!("must be positive and finite, got {m}")));
    }
    Ok(())
}

/// Ball of mass `m1` at the origin and ball of mass `m2` centered at `d e_1`.
///
/// `separation = inf` stands for the limit of infinitely distant balls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBallConfig {
    pub dimension: usize,
    pub m1: f64,
    pub m2: f64,
    pub separation: f64,
}

impl TwoBallConfig {
    pub fn new(dimension: usize, m1: f64, m2: f64, separation: f64) -> Result<Self> {
        crate::geometry::check_dimension(dimension)?;
        check_mass("m1", m1)?;
        check_mass("m2", m2)?;
        let c = TwoBallConfig { dimension, m1, m2, separation };
        if !(separation > c.touching()) {
            return Err(Error::Precondition(format!(
                "balls overlap: separation {separation} does not exceed r1 + r2 = {}",
                c.touching()
            )));
        }
        Ok(c)
    }

    pub fn radii(&self) -> (f64, f64) {
        (radius(self.dimension, self.m1), radius(self.dimension, self.m2))
    }

    /// Center distance at which the balls touch.
    pub fn touching(&self) -> f64 {
        let (a, b) = self.radii();
        a + b
    }

    /// Distance between the two sets.
    pub fn set_distance(&self) -> f64 {
        self.separation - self.touching()
    }

    fn shapes(&self) -> Result<(Shape, Shape)> {
        let n = self.dimension;
        let (r1, r2) = self.radii();
        let mut c = vec![0.0; n];
        let u = Shape::ball(&c, r1)?;
        c[0] = self.separation;
        Ok((u, Shape::ball(&c, r2)?))
    }
}

/// Energy of the origin-centered ball of mass `m`.
pub fn single_ball_energy(m: f64, params: &EnergyParams, spec: &QuadratureSpec) -> Result<EnergyReport> {
    check_mass("m", m)?;
    let b = ball_of_volume(params.dimension(), m)?;
    total_energy(&Shape::Balls(b), params, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBallEnergy {
    pub config: TwoBallConfig,
    /// `F_(K,A)` of the ball at the origin.
    pub first: EnergyReport,
    /// `F_(K,0)` of the translated ball.
    pub second: EnergyReport,
    /// `int_{B1} int_{B2} K(x - y)`.
    pub kernel_cross: f64,
    pub kernel_cross_error: f64,
    /// `int_{B1} int_{B2} |x - y|^{-1}`.
    pub riesz_cross: f64,
    pub riesz_cross_error: f64,
    /// `F(B1) + F(B2) - 2 I_K + I_V`.
    pub total: f64,
    pub total_error: f64,
    /// `2 m1 m2 / d`.
    pub cross_bound: f64,
    /// The set distance is at least `d / 2`, so the bound must hold.
    pub bound_applies: bool,
}

/// Energy of the two-ball configuration, assembled from the single balls and
/// their cross terms. Only the ball at the origin feels the background.
pub fn two_ball_energy(cfg: &TwoBallConfig, params: &EnergyParams, spec: &QuadratureSpec) -> Result<TwoBallEnergy> {
    params.validate()?;
    if cfg.dimension != params.dimension() {
        return Err(Error::param("config", "dimension does not match the kernel"));
    }
    if !(cfg.separation > cfg.touching()) {
        return Err(Error::Precondition(format!(
            "balls overlap: separation {} does not exceed r1 + r2 = {}",
            cfg.separation,
            cfg.touching()
        )));
    }
    let first = single_ball_energy(cfg.m1, params, spec)?;
    let second = single_ball_energy(cfg.m2, &params.clone().with_a(0.0)?, spec)?;
    let (kc, vc) = if cfg.separation.is_finite() {
        let (u, w) = cfg.shapes()?;
        let k = interaction(&u, &w, Coupling::Kernel(&params.kernel), spec)?;
        let v = interaction(&u, &w, Coupling::Riesz { alpha: params.alpha }, spec)?;
        ((k.value, k.error), (v.value, v.error))
    } else {
        ((0.0, 0.0), (0.0, 0.0))
    };
    let total = first.total + second.total - 2.0 * kc.0 + vc.0;
    let total_error = [first.total_error, second.total_error, 2.0 * kc.1, vc.1]
        .iter()
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt();
    Ok(TwoBallEnergy {
        config: *cfg,
        first,
        second,
        kernel_cross: kc.0,
        kernel_cross_error: kc.1,
        riesz_cross: vc.0,
        riesz_cross_error: vc.1,
        total,
        total_error,
        cross_bound: 2.0 * cfg.m1 * cfg.m2 / cfg.separation,
        bound_applies: cfg.set_distance() >= 0.5 * cfg.separation,
    })
}

/// Center distances searched for each mass split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationGrid {
    Explicit(Vec<f64>),
    /// Log-spaced from `(1 + gap)` times the touching distance to `far`
    /// diameters of the single ball, optionally followed by `inf`.
    LogSpan {
        points: usize,
        gap: f64,
        far: f64,
        infinite: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyGrid {
    /// `m1 / m` for each split.
    pub fractions: Vec<f64>,
    pub separations: SeparationGrid,
}

impl Default for FamilyGrid {
    fn default() -> Self {
        FamilyGrid {
            fractions: (1..10).map(|i| i as f64 / 10.0).collect(),
            separations: SeparationGrid::LogSpan {
                points: 8,
                gap: 1e-3,
                far: 1e3,
                infinite: true,
            },
        }
    }
}

impl FamilyGrid {
    fn points(&self, n: usize, m: f64) -> Result<Vec<TwoBallConfig>> {
        if self.fractions.is_empty() || self.fractions.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::param("fractions", "need at least one fraction in (0, 1)"));
        }
        let diameter = 2.0 * radius(n, m);
        let mut out = Vec::new();
        for &f in &self.fractions {
            let (m1, m2) = (f * m, (1.0 - f) * m);
            let touch = radius(n, m1) + radius(n, m2);
            let ds = match &self.separations {
                SeparationGrid::Explicit(v) => v.clone(),
                &SeparationGrid::LogSpan { points, gap, far, infinite } => {
                    if !(gap > 0.0) || !(far * diameter > touch * (1.0 + gap)) {
                        return Err(Error::param("separations", "need gap > 0 and a far end beyond touching"));
                    }
                    let (a, b) = ((touch * (1.0 + gap)).ln(), (far * diameter).ln());
                    let mut v: Vec<f64> = match points {
                        0 => Vec::new(),
                        1 => vec![a.exp()],
                        p => (0..p).map(|i| (a + (b - a) * i as f64 / (p - 1) as f64).exp()).collect(),
                    };
                    if infinite {
                        v.push(f64::INFINITY);
                    }
                    v
                }
            };
            if ds.is_empty() {
                return Err(Error::param("separations", "need at least one separation"));
            }
            for d in ds {
                out.push(TwoBallConfig::new(n, m1, m2, d)?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub m1: f64,
    pub m2: f64,
    pub separation: f64,
    pub energy: f64,
    pub error: f64,
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySearchResult {
    pub mass: f64,
    pub best: TwoBallConfig,
    pub best_energy: f64,
    pub best_error: f64,
    pub reference_energy: f64,
    pub reference_error: f64,
    /// `reference - best`; positive when splitting beats the ball.
    pub margin: f64,
    pub margin_error: f64,
    pub trace: Vec<TraceEntry>,
}

impl FamilySearchResult {
    /// Smallest energy in the family including the single ball.
    pub fn family_min(&self) -> (f64, f64) {
        if self.best_energy < self.reference_energy {
            (self.best_energy, self.best_error)
        } else {
            (self.reference_energy, self.reference_error)
        }
    }

    /// The margin exceeds three combined standard errors.
    pub fn split_wins(&self) -> bool {
        self.margin > 3.0 * self.margin_error
    }
}

/// Minimise the two-ball energy over the grid and compare with the ball.
pub fn split_advantage(m: f64, params: &EnergyParams, grid: &FamilyGrid, spec: &QuadratureSpec) -> Result<FamilySearchResult> {
    check_mass("m", m)?;
    params.validate()?;
    let reference = single_ball_energy(m, params, spec)?;
    let configs = grid.points(params.dimension(), m)?;
    let evals = configs
        .par_iter()
        .map(|c| two_ball_energy(c, params, spec))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    let mut trace = Vec::with_capacity(evals.len());
    for (i, e) in evals.iter().enumerate() {
        if e.total < evals[best].total {
            best = i;
        }
        trace.push(TraceEntry {
            m1: e.config.m1,
            m2: e.config.m2,
            separation: e.config.separation,
            energy: e.total,
            error: e.total_error,
            best_so_far: evals[best].total,
        });
    }
    let b = &evals[best];
    Ok(FamilySearchResult {
        mass: m,
        best: b.config,
        best_energy: b.total,
        best_error: b.total_error,
        reference_energy: reference.total,
        reference_error: reference.total_error,
        margin: reference.total - b.total,
        margin_error: reference.total_error.hypot(b.total_error),
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityProbe {
    pub m1: f64,
    pub m2: f64,
    /// Family minimum of the two-ball grid at `m1 + m2`, with background.
    pub grid_min: f64,
    pub grid_error: f64,
    /// Family minimum at `m1` with background.
    pub first: f64,
    pub first_error: f64,
    /// Family minimum at `m2` without background.
    pub second: f64,
    pub second_error: f64,
    /// Family minimum at `m1 + m2`; the family also holds the infinitely
    /// distant union of the two minimisers above.
    pub combined: f64,
    pub combined_error: f64,
    /// `combined - (first + second)`.
    pub residual: f64,
    pub residual_error: f64,
    /// `grid_min - (first + second)`: how far the two-ball grid alone is
    /// from the bound.
    pub grid_gap: f64,
}

impl SubadditivityProbe {
    pub fn holds(&self) -> bool {
        self.residual <= 3.0 * self.residual_error
    }
}

/// Compare family minima at `m1 + m2`, `m1` and `m2`.
pub fn weak_subadditivity_probe(m1: f64, m2: f64, params: &EnergyParams, grid: &FamilyGrid, spec: &QuadratureSpec) -> Result<SubadditivityProbe> {
    check_mass("m1", m1)?;
    check_mass("m2", m2)?;
    let zero = params.clone().with_a(0.0)?;
    let (g, g_err) = split_advantage(m1 + m2, params, grid, spec)?.family_min();
    let (a, a_err) = split_advantage(m1, params, grid, spec)?.family_min();
    let (b, b_err) = split_advantage(m2, &zero, grid, spec)?.family_min();
    let (far, far_err) = (a + b, a_err.hypot(b_err));
    let (combined, combined_error) = if g < far { (g, g_err) } else { (far, far_err) };
    Ok(SubadditivityProbe {
        m1,
        m2,
        grid_min: g,
        grid_error: g_err,
        first: a,
        first_error: a_err,
        second: b,
        second_error: b_err,
        combined,
        combined_error,
        residual: combined - far,
        residual_error: combined_error.hypot(far_err),
        grid_gap: g - far,
    })
}

#[cfg(test)]
mod tests;
