//! Shapes: ball configurations, voxel sets, halfspace clips and unions.
//!
//! Points are handled internally as `[f64; 3]` with a zero third coordinate
//! in two dimensions; the public constructors take slices of length N.

mod balls;
mod clip;
pub mod io;
mod voxel;

pub use balls::{ball_of_volume, Ball, BallConfig};
pub use voxel::VoxelShape;

use crate::error::{Error, Result};
use crate::quadrature::pair::Interval;
use serde::{Deserialize, Serialize};

pub type Point = [f64; 3];

pub(crate) fn to_point(x: &[f64], dim: usize) -> Result<Point> {
    if x.len() != dim {
        return Err(Error::param("point", format!("expected {dim} coordinates, got {}", x.len())));
    }
    let mut p = [0.0; 3];
    p[..dim].copy_from_slice(x);
    Ok(p)
}

pub(crate) fn check_dimension(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::param("dimension", format!("shapes live in N = 2 or 3, got {dim}")))
    }
}

#[inline]
pub(crate) fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scaled(a: &Point, k: f64) -> Point {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub(crate) fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

/// An oriented line `point + t * dir` with unit `dir`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: Point,
    pub dir: Point,
}

impl Line {
    pub fn at(&self, t: f64) -> Point {
        add(&self.point, &scaled(&self.dir, t))
    }
}

/// Sort and merge overlapping or touching intervals; drops empty ones.
pub fn merge_intervals(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|iv| iv.1 > iv.0);
    v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for iv in v {
        match out.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => out.push(iv),
        }
    }
    out
}

/// Intersection of a sorted disjoint union with `[lo, hi)`.
pub fn restrict_intervals(v: &[Interval], lo: f64, hi: f64) -> Vec<Interval> {
    v.iter()
        .filter_map(|&(a, b)| {
            let (a, b) = (a.max(lo), b.min(hi));
            (b > a).then_some((a, b))
        })
        .collect()
}

/// The closed halfspace `{x : x . nu >= l}` and its complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    nu: Point,
    l: f64,
    dim: usize,
}

impl Halfspace {
    pub fn new(nu: &[f64], l: f64) -> Result<Self> {
        let dim = nu.len();
        check_dimension(dim)?;
        let nu = to_point(nu, dim)?;
        if (norm(&nu) - 1.0).abs() > 1e-12 {
            return Err(Error::param("nu", format!("|nu| = {} is not 1", norm(&nu))));
        }
        if !l.is_finite() {
            return Err(Error::param("l", "offset must be finite"));
        }
        Ok(Halfspace { nu, l, dim })
    }

    /// Accepts any nonzero direction and normalises it.
    pub fn from_direction(dir: &[f64], l: f64) -> Result<Self> {
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(Error::param("nu", "zero direction"));
        }
        let unit: Vec<f64> = dir.iter().map(|x| x / n).collect();
        Self::new(&unit, l)
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu[..self.dim]
    }

    pub(crate) fn normal(&self) -> Point {
        self.nu
    }

    pub fn offset(&self) -> f64 {
        self.l
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// The complementary open halfspace, returned as a closed one (they
    /// differ by a null set).
    pub fn flipped(&self) -> Self {
        Halfspace {
            nu: scaled(&self.nu, -1.0),
            l: -self.l,
            dim: self.dim,
        }
    }

    pub(crate) fn contains(&self, x: &Point) -> bool {
        dot(x, &self.nu) >= self.l
    }

    /// Parameter range of the line inside the halfspace.
    pub(crate) fn line_range(&self, line: &Line) -> (f64, f64) {
        let c = dot(&line.dir, &self.nu);
        let p = dot(&line.point, &self.nu) - self.l;
        if c.abs() < 1e-300 {
            return if p >= 0.0 {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                (0.0, 0.0)
            };
        }
        let t0 = -p / c;
        if c > 0.0 {
            (t0, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, t0)
        }
    }
}

/// Axis-aligned box, `lo[i] <= x[i] <= hi[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Point,
    pub hi: Point,
}

impl BoundingBox {
    pub fn empty() -> Self {
        BoundingBox {
            lo: [f64::INFINITY; 3],
            hi: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.lo[i] > self.hi[i])
    }

    pub fn union(&self, o: &BoundingBox) -> BoundingBox {
        let mut b = *self;
        for i in 0..3 {
            b.lo[i] = b.lo[i].min(o.lo[i]);
            b.hi[i] = b.hi[i].max(o.hi[i]);
        }
        b
    }

    pub fn volume(&self, dim: usize) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        (0..dim).map(|i| self.hi[i] - self.lo[i]).product()
    }
}

/// A measurable bounded set.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Balls(BallConfig),
    Voxels(VoxelShape),
    /// `base` intersected with every halfspace in `cuts`.
    Clipped { base: Box<Shape>, cuts: Vec<Halfspace> },
    /// Union of parts assumed to overlap only in null sets.
    Union(Vec<Shape>),
}

impl Shape {
    pub fn empty(dim: usize) -> Self {
        Shape::Balls(BallConfig::empty(dim))
    }

    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        Ok(Shape::Balls(BallConfig::new(center.len(), vec![(center.to_vec(), radius)])?))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Shape::Balls(b) => b.dimension(),
            Shape::Voxels(v) => v.dimension(),
            Shape::Clipped { base, .. } => base.dimension(),
            Shape::Union(parts) => parts.first().map_or(2, |p| p.dimension()),
        }
    }

    pub fn union(parts: Vec<Shape>) -> Result<Self> {
        if let Some(first) = parts.first() {
            let d = first.dimension();
            if parts.iter().any(|p| p.dimension() != d) {
                return Err(Error::param("shape", "union of shapes with different dimensions"));
            }
        }
        Ok(Shape::Union(parts))
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Shape::Balls(b) => b.balls().is_empty(),
            Shape::Voxels(v) => v.occupied() == 0,
            Shape::Clipped { base, .. } => base.is_empty(),
            Shape::Union(parts) => parts.iter().all(|p| p.is_empty()),
        }
    }

    /// Lebesgue measure.
    pub fn volume(&self) -> Result<f64> {
        match self {
            Shape::Balls(b) => b.volume(),
            Shape::Voxels(v) => Ok(v.volume()),
            Shape::Clipped { base, cuts } => clip::clipped_volume(base, cuts),
            Shape::Union(parts) => parts.iter().map(|p| p.volume()).sum(),
        }
    }

    pub(crate) fn contains(&self, x: &Point) -> bool {
        match self {
            Shape::Balls(b) => b.contains(x),
            Shape::Voxels(v) => v.contains(x),
            Shape::Clipped { base, cuts } => cuts.iter().all(|h| h.contains(x)) && base.contains(x),
            Shape::Union(parts) => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Membership of `x` (length N) as 0 or 1.
    pub fn indicator(&self, x: &[f64]) -> Result<u8> {
        let p = to_point(x, self.dimension())?;
        Ok(self.contains(&p) as u8)
    }

    /// Sorted disjoint parameter intervals of `line` inside the shape.
    pub fn line_intervals(&self, line: &Line) -> Vec<Interval> {
        match self {
            Shape::Balls(b) => b.line_intervals(line),
            Shape::Voxels(v) => v.line_intervals(line),
            Shape::Clipped { base, cuts } => {
                let mut lo = f64::NEG_INFINITY;
                let mut hi = f64::INFINITY;
                for h in cuts {
                    let (a, b) = h.line_range(line);
                    lo = lo.max(a);
                    hi = hi.min(b);
                }
                if !(hi > lo) {
                    return Vec::new();
                }
                restrict_intervals(&base.line_intervals(line), lo, hi)
            }
            Shape::Union(parts) => {
                merge_intervals(parts.iter().flat_map(|p| p.line_intervals(line)).collect())
            }
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        match self {
            Shape::Balls(b) => b.bounding_box(),
            Shape::Voxels(v) => v.bounding_box(),
            Shape::Clipped { base, .. } => base.bounding_box(),
            Shape::Union(parts) => parts
                .iter()
                .fold(BoundingBox::empty(), |acc, p| acc.union(&p.bounding_box())),
        }
    }

    /// A ball containing the shape, as (center, radius). Radius 0 for empty shapes.
    pub fn bounding_sphere(&self) -> (Point, f64) {
        match self {
            Shape::Balls(b) => b.bounding_sphere(),
            Shape::Clipped { base, .. } => base.bounding_sphere(),
            _ => {
                let bb = self.bounding_box();
                if bb.is_empty() {
                    return ([0.0; 3], 0.0);
                }
                let c = scaled(&add(&bb.lo, &bb.hi), 0.5);
                (c, norm(&sub(&bb.hi, &c)))
            }
        }
    }

    /// Range of `x . nu` over the shape (or over a superset for clipped shapes).
    pub fn extent_along(&self, nu: &[f64]) -> Result<(f64, f64)> {
        let n = to_point(nu, self.dimension())?;
        Ok(self.extent(&n))
    }

    pub(crate) fn extent(&self, nu: &Point) -> (f64, f64) {
        match self {
            Shape::Balls(b) => b.extent(nu),
            Shape::Voxels(v) => v.extent(nu),
            Shape::Clipped { base, cuts } => {
                let (mut lo, mut hi) = base.extent(nu);
                for h in cuts {
                    let c = dot(&h.normal(), nu);
                    if (c - 1.0).abs() < 1e-12 {
                        lo = lo.max(h.offset());
                    } else if (c + 1.0).abs() < 1e-12 {
                        hi = hi.min(-h.offset());
                    }
                }
                (lo, hi.max(lo))
            }
            Shape::Union(parts) => parts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, p| {
                let e = p.extent(nu);
                (acc.0.min(e.0), acc.1.max(e.1))
            }),
        }
    }

    pub fn translate(&self, v: &[f64]) -> Result<Shape> {
        let p = to_point(v, self.dimension())?;
        Ok(self.translated(&p))
    }

    pub(crate) fn translated(&self, p: &Point) -> Shape {
        match self {
            Shape::Balls(b) => Shape::Balls(b.translated(p)),
            Shape::Voxels(v) => Shape::Voxels(v.translated(p)),
            Shape::Clipped { base, cuts } => Shape::Clipped {
                base: Box::new(base.translated(p)),
                cuts: cuts
                    .iter()
                    .map(|h| Halfspace {
                        l: h.l + dot(&h.nu, p),
                        ..*h
                    })
                    .collect(),
            },
            Shape::Union(parts) => Shape::Union(parts.iter().map(|s| s.translated(p)).collect()),
        }
    }

    /// `lambda * E`, plus the absolute volume error introduced by resampling
    /// (zero except for voxel shapes scaled by non-integer factors).
    pub fn scale(&self, lambda: f64) -> Result<(Shape, f64)> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("scale factor must be positive, got {lambda}")));
        }
        Ok(match self {
            Shape::Balls(b) => (Shape::Balls(b.scaled(lambda)), 0.0),
            Shape::Voxels(v) => {
                let (w, err) = v.scaled(lambda);
                (Shape::Voxels(w), err)
            }
            Shape::Clipped { base, cuts } => {
                let (b, err) = base.scale(lambda)?;
                let cuts = cuts.iter().map(|h| Halfspace { l: h.l * lambda, ..*h }).collect();
                (
                    Shape::Clipped {
                        base: Box::new(b),
                        cuts,
                    },
                    err,
                )
            }
            Shape::Union(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                let mut err = 0.0;
                for p in parts {
                    let (q, e) = p.scale(lambda)?;
                    out.push(q);
                    err += e;
                }
                (Shape::Union(out), err)
            }
        })
    }

    /// `E` intersected with the halfspace (exact, no resampling).
    pub fn clip(&self, h: &Halfspace) -> Shape {
        match self {
            Shape::Clipped { base, cuts } => {
                let mut cuts = cuts.clone();
                cuts.push(*h);
                Shape::Clipped {
                    base: base.clone(),
                    cuts,
                }
            }
            other => Shape::Clipped {
                base: Box::new(other.clone()),
                cuts: vec![*h],
            },
        }
    }

    /// Split into `(E ∩ H+, E ∩ H-)`.
    ///
    /// Voxel shapes are split cell by cell according to the cell center, so
    /// both halves stay voxel shapes on the same grid. Every other shape is
    /// clipped exactly.
    pub fn slice(&self, h: &Halfspace) -> Result<(Shape, Shape)> {
        if h.dimension() != self.dimension() {
            return Err(Error::param("halfspace", "dimension does not match the shape"));
        }
        match self {
            Shape::Voxels(v) => {
                let (p, m) = v.split_by_center(h);
                Ok((Shape::Voxels(p), Shape::Voxels(m)))
            }
            _ => Ok((self.clip(h), self.clip(&h.flipped()))),
        }
    }
}
