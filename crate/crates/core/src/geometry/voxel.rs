use super::{check_dimension, dot, to_point, BoundingBox, Halfspace, Line, Point, Shape};
use crate::error::{Error, Result};
use crate::quadrature::pair::Interval;

/// Occupancy grid of cubical cells `origin + h * [i, i+1) x [j, j+1) (x [k, k+1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelShape {
    dim: usize,
    dims: [usize; 3],
    origin: Point,
    spacing: f64,
    cells: Vec<bool>,
    count: usize,
}

impl VoxelShape {
    /// `cells` is indexed `i + nx * (j + ny * k)`.
    pub fn new(dim: usize, dims: &[usize], origin: &[f64], spacing: f64, cells: Vec<bool>) -> Result<Self> {
        check_dimension(dim)?;
        if dims.len() != dim {
            return Err(Error::param("dims", format!("expected {dim} grid sizes")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
        }
        let mut d = [1usize; 3];
        d[..dim].copy_from_slice(dims);
        if d.iter().product::<usize>() != cells.len() {
            return Err(Error::param("cells", format!("grid {:?} needs {} cells, got {}", dims, d.iter().product::<usize>(), cells.len())));
        }
        let count = cells.iter().filter(|&&c| c).count();
        Ok(VoxelShape {
            dim,
            dims: d,
            origin: to_point(origin, dim)?,
            spacing,
            cells,
            count,
        })
    }

    /// Grid whose cells are occupied when `f(center)` holds.
    pub fn from_fn<F: Fn(&[f64]) -> bool>(dim: usize, dims: &[usize], origin: &[f64], spacing: f64, f: F) -> Result<Self> {
        let mut d = [1usize; 3];
        if dims.len() != dim {
            return Err(Error::param("dims", format!("expected {dim} grid sizes")));
        }
        d[..dim].copy_from_slice(dims);
        let o = to_point(origin, dim)?;
        let mut cells = Vec::with_capacity(d.iter().product());
        for k in 0..d[2] {
            for j in 0..d[1] {
                for i in 0..d[0] {
                    let c = [
                        o[0] + (i as f64 + 0.5) * spacing,
                        o[1] + (j as f64 + 0.5) * spacing,
                        o[2] + (k as f64 + 0.5) * spacing,
                    ];
                    cells.push(f(&c[..dim]));
                }
            }
        }
        Self::new(dim, dims, origin, spacing, cells)
    }

    /// Voxelize `shape` by cell centers on a grid of spacing `h` covering its bounding box.
    pub fn voxelize(shape: &Shape, spacing: f64) -> Result<Self> {
        let dim = shape.dimension();
        let bb = shape.bounding_box();
        if bb.is_empty() {
            return Self::new(dim, &vec![1; dim], &vec![0.0; dim], spacing, vec![false]);
        }
        let mut dims = Vec::with_capacity(dim);
        let mut origin = Vec::with_capacity(dim);
        for i in 0..dim {
            let n = ((bb.hi[i] - bb.lo[i]) / spacing).ceil().max(1.0) as usize + 2;
            let mid = 0.5 * (bb.lo[i] + bb.hi[i]);
            dims.push(n);
            origin.push(mid - 0.5 * n as f64 * spacing);
        }
        Self::from_fn(dim, &dims, &origin, spacing, |x| {
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(x);
            shape.contains(&p)
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.dim]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn occupied(&self) -> usize {
        self.count
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.count as f64 * self.cell_volume()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let k = idx / (self.dims[0] * self.dims[1]);
        [i, j, k]
    }

    pub fn get(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    /// Set a cell and keep the occupied count consistent.
    pub fn set(&mut self, idx: usize, value: bool) {
        if self.cells[idx] != value {
            self.cells[idx] = value;
            if value {
                self.count += 1;
            } else {
                self.count -= 1;
            }
        }
    }

    pub(crate) fn cell_center(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + (c[a] as f64 + 0.5) * self.spacing;
        }
        p
    }

    pub(crate) fn cell_lo(&self, idx: usize) -> Point {
        let c = self.coords(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + c[a] as f64 * self.spacing;
        }
        p
    }

    pub(crate) fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().enumerate().filter(|(_, &c)| c).map(|(i, _)| i)
    }

    pub(crate) fn contains(&self, x: &Point) -> bool {
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            let u = ((x[a] - self.origin[a]) / self.spacing).floor();
            if u < 0.0 || u >= self.dims[a] as f64 {
                return false;
            }
            idx[a] = u as usize;
        }
        self.cells[self.index(idx[0], idx[1], idx[2])]
    }

    pub(crate) fn bounding_box(&self) -> BoundingBox {
        let mut bb = BoundingBox::empty();
        for idx in self.occupied_indices() {
            let lo = self.cell_lo(idx);
            for a in 0..self.dim {
                bb.lo[a] = bb.lo[a].min(lo[a]);
                bb.hi[a] = bb.hi[a].max(lo[a] + self.spacing);
            }
        }
        if self.count > 0 {
            for a in self.dim..3 {
                bb.lo[a] = 0.0;
                bb.hi[a] = 0.0;
            }
        }
        bb
    }

    pub(crate) fn extent(&self, nu: &Point) -> (f64, f64) {
        let half: f64 = 0.5 * self.spacing * (0..self.dim).map(|a| nu[a].abs()).sum::<f64>();
        self.occupied_indices().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, idx| {
            let c = dot(&self.cell_center(idx), nu);
            (acc.0.min(c - half), acc.1.max(c + half))
        })
    }

    pub(crate) fn translated(&self, p: &Point) -> Self {
        let mut v = self.clone();
        for a in 0..self.dim {
            v.origin[a] += p[a];
        }
        v
    }

    /// Resample `lambda * E` on a grid with the same spacing, classifying new
    /// cells by the preimage of their centers. Returns the shape and
    /// `| |lambda E|_grid - lambda^N |E| |`.
    pub(crate) fn scaled(&self, lambda: f64) -> (Self, f64) {
        let mut dims = [1usize; 3];
        let mut origin = [0.0; 3];
        for a in 0..self.dim {
            dims[a] = (self.dims[a] as f64 * lambda).ceil() as usize;
            origin[a] = self.origin[a] * lambda;
        }
        let h = self.spacing;
        let mut cells = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let idx = [i, j, k];
                    let mut pre = [0.0; 3];
                    for a in 0..self.dim {
                        pre[a] = (origin[a] + (idx[a] as f64 + 0.5) * h) / lambda;
                    }
                    cells.push(self.contains(&pre));
                }
            }
        }
        let out = VoxelShape::new(self.dim, &dims[..self.dim], &origin[..self.dim], h, cells).expect("valid grid");
        let err = (out.volume() - lambda.powi(self.dim as i32) * self.volume()).abs();
        (out, err)
    }

    pub(crate) fn split_by_center(&self, h: &Halfspace) -> (Self, Self) {
        let mut plus = self.clone();
        let mut minus = self.clone();
        let nu = h.normal();
        for idx in self.occupied_indices() {
            if dot(&self.cell_center(idx), &nu) >= h.offset() {
                minus.set(idx, false);
            } else {
                plus.set(idx, false);
            }
        }
        (plus, minus)
    }

    /// Cells pierced by the line, merged into maximal occupied runs.
    pub(crate) fn line_intervals(&self, line: &Line) -> Vec<Interval> {
        if self.count == 0 {
            return Vec::new();
        }
        let h = self.spacing;
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for a in 0..self.dim {
            let lo = self.origin[a];
            let hi = lo + self.dims[a] as f64 * h;
            let d = line.dir[a];
            let p = line.point[a];
            if d.abs() < 1e-300 {
                if p < lo || p >= hi {
                    return Vec::new();
                }
            } else {
                let (ta, tb) = ((lo - p) / d, (hi - p) / d);
                t0 = t0.max(ta.min(tb));
                t1 = t1.min(ta.max(tb));
            }
        }
        if !(t1 > t0) {
            return Vec::new();
        }
        // starting cell: evaluate slightly inside the entry point
        let probe = t0 + 1e-9 * (t1 - t0);
        let mut cell = [0isize; 3];
        let mut step = [0isize; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..self.dim {
            let x = line.point[a] + probe * line.dir[a];
            let u = ((x - self.origin[a]) / h).floor() as isize;
            cell[a] = u.clamp(0, self.dims[a] as isize - 1);
            let d = line.dir[a];
            if d > 1e-300 {
                step[a] = 1;
                let next = self.origin[a] + (cell[a] + 1) as f64 * h;
                t_max[a] = (next - line.point[a]) / d;
                t_delta[a] = h / d;
            } else if d < -1e-300 {
                step[a] = -1;
                let next = self.origin[a] + cell[a] as f64 * h;
                t_max[a] = (next - line.point[a]) / d;
                t_delta[a] = -h / d;
            }
        }
        let mut out: Vec<Interval> = Vec::new();
        let mut t = t0;
        loop {
            let axis = (0..self.dim)
                .min_by(|&a, &b| t_max[a].partial_cmp(&t_max[b]).unwrap())
                .unwrap();
            let t_next = t_max[axis].min(t1);
            let idx = self.index(cell[0] as usize, cell[1] as usize, cell[2] as usize);
            if self.cells[idx] && t_next > t {
                match out.last_mut() {
                    Some(last) if last.1 >= t => last.1 = t_next,
                    _ => out.push((t, t_next)),
                }
            }
            if t_next >= t1 {
                break;
            }
            t = t_next;
            cell[axis] += step[axis];
            if cell[axis] < 0 || cell[axis] >= self.dims[axis] as isize {
                break;
            }
            t_max[axis] += t_delta[axis];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> VoxelShape {
        VoxelShape::from_fn(2, &[n, n], &[0.0, 0.0], 1.0 / n as f64, |_| true).unwrap()
    }

    #[test]
    fn empty_grid_has_zero_volume() {
        let v = VoxelShape::new(2, &[4, 4], &[0.0, 0.0], 0.25, vec![false; 16]).unwrap();
        assert_eq!(v.volume(), 0.0);
        assert!(v.line_intervals(&Line { point: [0.5, 0.5, 0.0], dir: [1.0, 0.0, 0.0] }).is_empty());
    }

    #[test]
    fn split_square_by_center_count() {
        let n = 33;
        let v = square(n);
        let h = Halfspace::new(&[1.0, 0.0], 0.5).unwrap();
        let (p, m) = v.split_by_center(&h);
        // direct count oracle: columns whose center x = (i + 1/2)/n >= 1/2
        let cols_plus = (0..n).filter(|&i| (i as f64 + 0.5) / n as f64 >= 0.5).count();
        assert_eq!(p.occupied(), cols_plus * n);
        assert_eq!(p.occupied() + m.occupied(), v.occupied());
        let hs = v.spacing();
        assert!((p.volume() - 0.5).abs() <= hs && (m.volume() - 0.5).abs() <= hs);
    }

    #[test]
    fn diagonal_line_through_square() {
        let v = square(8);
        let s = 1.0 / 2f64.sqrt();
        let line = Line { point: [0.0, 0.0, 0.0], dir: [s, s, 0.0] };
        let iv = v.line_intervals(&line);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0).abs() < 1e-12 && (iv[0].1 - 2f64.sqrt()).abs() < 1e-12, "{iv:?}");
    }

    #[test]
    fn line_runs_match_indicator_sampling() {
        let v = VoxelShape::from_fn(2, &[16, 16], &[-1.0, -1.0], 0.125, |x| (x[0] * 3.0).sin() + x[1] > 0.2).unwrap();
        let dir = [0.6, 0.8, 0.0];
        let line = Line { point: [-0.3, 0.1, 0.0], dir };
        let iv = v.line_intervals(&line);
        for step in 0..4000 {
            let t = -3.0 + step as f64 * 0.0015 + 1e-7;
            let inside = v.contains(&line.at(t));
            let covered = iv.iter().any(|&(a, b)| t > a && t < b);
            let near_edge = iv.iter().any(|&(a, b)| (t - a).abs() < 1e-6 || (t - b).abs() < 1e-6);
            assert!(inside == covered || near_edge, "t = {t}");
        }
    }

    #[test]
    fn scaling_by_two_is_exact() {
        let v = VoxelShape::from_fn(2, &[10, 10], &[0.0, 0.0], 0.1, |x| x[0] + x[1] < 1.0).unwrap();
        let (w, err) = v.scaled(2.0);
        assert_eq!(err, 0.0);
        assert_eq!(w.occupied(), 4 * v.occupied());
    }

    #[test]
    fn three_dimensional_line_crossing() {
        let v = VoxelShape::from_fn(3, &[4, 4, 4], &[0.0, 0.0, 0.0], 0.25, |_| true).unwrap();
        let d = 1.0 / 3f64.sqrt();
        let iv = v.line_intervals(&Line { point: [0.0, 0.0, 0.0], dir: [d, d, d] });
        assert_eq!(iv.len(), 1);
        assert!((iv[0].1 - iv[0].0 - 3f64.sqrt()).abs() < 1e-12);
    }
}
