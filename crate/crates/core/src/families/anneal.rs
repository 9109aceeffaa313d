//! Volume-preserving annealing on two-dimensional voxel grids.

use crate::energy::{total_energy, EnergyParams};
use crate::error::{Error, Result};
use crate::geometry::{Shape, VoxelShape};
use crate::quadrature::QuadratureSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOptions {
    pub steps: usize,
    pub initial_temperature: f64,
    /// Temperature factor applied after every epoch.
    pub ratio: f64,
    pub epoch: usize,
    pub seed: u64,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            steps: 200,
            initial_temperature: 1.0,
            ratio: 0.95,
            epoch: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealStep {
    pub step: usize,
    pub temperature: f64,
    /// Energy of the proposed swap.
    pub proposed: f64,
    pub accepted: bool,
    /// Energy of the current state after the step.
    pub current: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealResult {
    /// Lowest-energy shape seen.
    pub shape: VoxelShape,
    pub energy: f64,
    pub initial_energy: f64,
    pub trace: Vec<AnnealStep>,
}

fn neighbours(v: &VoxelShape, idx: usize) -> impl Iterator<Item = usize> + '_ {
    let d = v.dims();
    let [i, j, _] = v.coords(idx);
    let (i, j) = (i as isize, j as isize);
    [(-1, 0), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(a, b)| {
        let (x, y) = (i + a, j + b);
        (x >= 0 && y >= 0 && (x as usize) < d[0] && (y as usize) < d[1]).then(|| v.index(x as usize, y as usize, 0))
    })
}

/// Occupied cells touching the complement and empty cells touching the set.
fn frontier(v: &VoxelShape) -> (Vec<usize>, Vec<usize>) {
    let c = v.cells();
    let (mut inner, mut outer) = (Vec::new(), Vec::new());
    for idx in 0..c.len() {
        let n: Vec<usize> = neighbours(v, idx).collect();
        if c[idx] {
            if n.len() < 4 || n.iter().any(|&k| !c[k]) {
                inner.push(idx);
            }
        } else if n.iter().any(|&k| c[k]) {
            outer.push(idx);
        }
    }
    (inner, outer)
}

fn swapped(v: &VoxelShape, from: usize, to: usize) -> Result<VoxelShape> {
    let mut cells = v.cells().to_vec();
    cells[from] = false;
    cells[to] = true;
    VoxelShape::new(2, v.dims(), v.origin(), v.spacing(), cells)
}

fn energy(v: &VoxelShape, params: &EnergyParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(total_energy(&Shape::Voxels(v.clone()), params, spec)?.total)
}

/// Anneal `e0` by moving one boundary cell to an empty cell next to the set.
///
/// Proposals raising the energy by `dE` are accepted with probability
/// `exp(-dE / T)`; at `T = 0` only strict improvements are accepted. Energies
/// use the same quadrature samples throughout, so the objective is a fixed
/// function of the shape.
pub fn voxel_local_search(e0: &VoxelShape, params: &EnergyParams, opts: &AnnealOptions, spec: &QuadratureSpec) -> Result<AnnealResult> {
    if e0.dimension() != 2 || params.dimension() != 2 {
        return Err(Error::param("shape", "local search runs on two-dimensional grids"));
    }
    if !(opts.initial_temperature >= 0.0) || !(opts.ratio > 0.0 && opts.ratio <= 1.0) || opts.epoch == 0 {
        return Err(Error::param("schedule", "need temperature >= 0, ratio in (0, 1] and epoch >= 1"));
    }
    let e_init = energy(e0, params, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut cur, mut cur_e) = (e0.clone(), e_init);
    let (mut best, mut best_e) = (e0.clone(), e_init);
    let mut t = opts.initial_temperature;
    let mut trace = Vec::with_capacity(opts.steps);
    for step in 0..opts.steps {
        if step > 0 && step % opts.epoch == 0 {
            t *= opts.ratio;
        }
        let (inner, outer) = frontier(&cur);
        if inner.is_empty() || outer.is_empty() {
            break;
        }
        let from = inner[rng.random_range(0..inner.len())];
        let to = outer[rng.random_range(0..outer.len())];
        let cand = swapped(&cur, from, to)?;
        let e = energy(&cand, params, spec)?;
        let u: f64 = rng.random();
        let accepted = e < cur_e || (t > 0.0 && u < (-(e - cur_e) / t).exp());
        if accepted {
            cur = cand;
            cur_e = e;
            if cur_e < best_e {
                best = cur.clone();
                best_e = cur_e;
            }
        }
        trace.push(AnnealStep {
            step,
            temperature: t,
            proposed: e,
            accepted,
            current: cur_e,
            best: best_e,
        });
    }
    Ok(AnnealResult {
        shape: best,
        energy: best_e,
        initial_energy: e_init,
        trace,
    })
}
