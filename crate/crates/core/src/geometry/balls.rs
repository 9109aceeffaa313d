use super::{add, check_dimension, dot, merge_intervals, norm, scaled, sub, to_point, BoundingBox, Line, Point};
use crate::constants::ball_volume;
use crate::error::{Error, Result};
use crate::quadrature::pair::Interval;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn center(&self, dim: usize) -> Vec<f64> {
        self.center[..dim].to_vec()
    }

    pub(crate) fn chord(&self, line: &Line) -> Option<Interval> {
        let d = sub(&line.point, &self.center);
        let b = dot(&d, &line.dir);
        let c = dot(&d, &d) - self.radius * self.radius;
        let disc = b * b - c;
        if disc <= 0.0 {
            return None;
        }
        let s = disc.sqrt();
        Some((-b - s, -b + s))
    }
}

/// A finite list of balls in R^N.
#[derive(Debug, Clone, PartialEq)]
pub struct BallConfig {
    dim: usize,
    balls: Vec<Ball>,
    disjoint: bool,
}

const TANGENCY_TOL: f64 = 1e-12;

impl BallConfig {
    pub fn empty(dim: usize) -> Self {
        BallConfig {
            dim,
            balls: Vec::new(),
            disjoint: true,
        }
    }

    /// Balls given as `(center, radius)`; centers must have length `dim`.
    pub fn new(dim: usize, balls: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        check_dimension(dim)?;
        let mut out = Vec::with_capacity(balls.len());
        for (c, r) in balls {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::param("radius", format!("must be positive, got {r}")));
            }
            let center = to_point(&c, dim)?;
            if center.iter().any(|x| !x.is_finite()) {
                return Err(Error::param("center", "non-finite coordinate"));
            }
            out.push(Ball { center, radius: r });
        }
        let disjoint = pairwise_disjoint(&out);
        Ok(BallConfig {
            dim,
            balls: out,
            disjoint,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// Whether no two balls overlap in a set of positive measure.
    pub fn is_disjoint(&self) -> bool {
        self.disjoint
    }

    pub fn volume(&self) -> Result<f64> {
        if !self.disjoint {
            return Err(Error::Precondition(
                "ball configuration overlaps; its volume is not the sum of ball volumes".into(),
            ));
        }
        let w = ball_volume(self.dim);
        Ok(self.balls.iter().map(|b| w * b.radius.powi(self.dim as i32)).sum())
    }

    pub(crate) fn contains(&self, x: &Point) -> bool {
        self.balls.iter().any(|b| {
            let d = sub(x, &b.center);
            dot(&d, &d) <= b.radius * b.radius
        })
    }

    pub(crate) fn line_intervals(&self, line: &Line) -> Vec<Interval> {
        let chords: Vec<Interval> = self.balls.iter().filter_map(|b| b.chord(line)).collect();
        if chords.len() <= 1 {
            return chords;
        }
        merge_intervals(chords)
    }

    pub(crate) fn bounding_box(&self) -> BoundingBox {
        let mut bb = BoundingBox::empty();
        for b in &self.balls {
            for i in 0..self.dim {
                bb.lo[i] = bb.lo[i].min(b.center[i] - b.radius);
                bb.hi[i] = bb.hi[i].max(b.center[i] + b.radius);
            }
        }
        if !self.balls.is_empty() {
            for i in self.dim..3 {
                bb.lo[i] = 0.0;
                bb.hi[i] = 0.0;
            }
        }
        bb
    }

    pub(crate) fn bounding_sphere(&self) -> (Point, f64) {
        match self.balls.as_slice() {
            [] => ([0.0; 3], 0.0),
            [b] => (b.center, b.radius),
            _ => {
                let bb = self.bounding_box();
                let c = scaled(&add(&bb.lo, &bb.hi), 0.5);
                let r = self
                    .balls
                    .iter()
                    .map(|b| norm(&sub(&b.center, &c)) + b.radius)
                    .fold(0.0, f64::max);
                (c, r)
            }
        }
    }

    pub(crate) fn extent(&self, nu: &Point) -> (f64, f64) {
        self.balls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, b| {
            let c = dot(&b.center, nu);
            (acc.0.min(c - b.radius), acc.1.max(c + b.radius))
        })
    }

    pub(crate) fn translated(&self, p: &Point) -> Self {
        BallConfig {
            balls: self
                .balls
                .iter()
                .map(|b| Ball {
                    center: add(&b.center, p),
                    radius: b.radius,
                })
                .collect(),
            ..self.clone()
        }
    }

    pub(crate) fn scaled(&self, lambda: f64) -> Self {
        BallConfig {
            balls: self
                .balls
                .iter()
                .map(|b| Ball {
                    center: scaled(&b.center, lambda),
                    radius: b.radius * lambda,
                })
                .collect(),
            ..self.clone()
        }
    }

    /// Concatenate two configurations.
    pub fn joined(&self, other: &BallConfig) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::param("shape", "ball configurations of different dimension"));
        }
        let mut balls = self.balls.clone();
        balls.extend_from_slice(&other.balls);
        let disjoint = pairwise_disjoint(&balls);
        Ok(BallConfig {
            dim: self.dim,
            balls,
            disjoint,
        })
    }
}

fn pairwise_disjoint(balls: &[Ball]) -> bool {
    for (i, a) in balls.iter().enumerate() {
        for b in &balls[i + 1..] {
            let d = norm(&sub(&a.center, &b.center));
            let rs = a.radius + b.radius;
            if d < rs * (1.0 - TANGENCY_TOL) {
                return false;
            }
        }
    }
    true
}

/// Origin-centered ball with volume `m`.
pub fn ball_of_volume(dim: usize, m: f64) -> Result<BallConfig> {
    check_dimension(dim)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::param("m", format!("mass must be positive, got {m}")));
    }
    let r = (m / ball_volume(dim)).powf(1.0 / dim as f64);
    BallConfig::new(dim, vec![(vec![0.0; dim], r)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volumes() {
        let b = BallConfig::new(3, vec![(vec![0.0; 3], 1.0)]).unwrap();
        assert!((b.volume().unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        let two = BallConfig::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![3.0, 0.0], 1.0)]).unwrap();
        assert!((two.volume().unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(BallConfig::empty(2).volume().unwrap() == 0.0);
    }

    #[test]
    fn overlapping_volume_is_an_error() {
        let b = BallConfig::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(!b.is_disjoint());
        assert!(b.volume().is_err());
        // tangent balls are fine
        let t = BallConfig::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![2.0, 0.0], 1.0)]).unwrap();
        assert!(t.is_disjoint());
    }

    #[test]
    fn ball_of_volume_radii() {
        let r = |n, m| ball_of_volume(n, m).unwrap().balls()[0].radius;
        assert!((r(3, 4.0 * PI / 3.0) - 1.0).abs() < 1e-14);
        assert!((r(2, PI) - 1.0).abs() < 1e-14);
        let oracle = (3.0 * 224.49 / (4.0 * PI)).cbrt();
        assert!((r(3, 224.49) - oracle).abs() < 1e-12);
        assert!(ball_of_volume(3, 0.0).is_err());
    }

    #[test]
    fn chords() {
        let b = BallConfig::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![3.0, 0.0], 1.0)]).unwrap();
        let line = Line {
            point: [0.0, 0.0, 0.0],
            dir: [1.0, 0.0, 0.0],
        };
        assert_eq!(b.line_intervals(&line), vec![(-1.0, 1.0), (2.0, 4.0)]);
        let miss = Line {
            point: [0.0, 2.0, 0.0],
            dir: [1.0, 0.0, 0.0],
        };
        assert!(b.line_intervals(&miss).is_empty());
    }
}
