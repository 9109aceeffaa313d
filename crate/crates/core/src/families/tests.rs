use super::*;
use crate::geometry::VoxelShape;
use crate::kernels::KernelSpec;
use crate::thresholds::critical_mass;
use std::f64::consts::PI;

fn params(n: usize, a: f64) -> EnergyParams {
    EnergyParams::new(KernelSpec::fractional(n, 0.5, if n == 2 { 0.8 } else { 0.5 }).unwrap(), a).unwrap()
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::monte_carlo(20_000, 17)
}

fn small_grid() -> FamilyGrid {
    FamilyGrid {
        fractions: vec![0.25, 0.5],
        separations: SeparationGrid::LogSpan {
            points: 3,
            gap: 1e-2,
            far: 10.0,
            infinite: true,
        },
    }
}

#[test]
fn single_ball_terms() {
    let r = single_ball_energy(4.0 * PI / 3.0, &params(3, 0.0), &spec()).unwrap();
    assert!((r.riesz - 16.0 * PI * PI / 15.0).abs() < 1e-2 * r.riesz);
    assert_eq!(r.total, r.perimeter + r.riesz);
    assert!(r.perimeter > 0.0 && r.riesz > 0.0);
    // moving the ball only changes the background term
    let p = params(3, 2.0);
    let at_origin = single_ball_energy(3.0, &p, &spec()).unwrap();
    let b = crate::geometry::ball_of_volume(3, 3.0).unwrap();
    let moved = total_energy(&Shape::Balls(b).translate(&[2.0, 0.0, 0.0]).unwrap(), &p, &spec()).unwrap();
    assert_eq!(at_origin.perimeter, moved.perimeter);
    assert_eq!(at_origin.riesz, moved.riesz);
    assert!(moved.background < at_origin.background);
    assert!(single_ball_energy(0.0, &p, &spec()).is_err());
}

#[test]
fn config_rejects_overlap() {
    let r = radius(3, 1.0);
    assert!(TwoBallConfig::new(3, 1.0, 1.0, 2.0 * r).is_err());
    assert!(TwoBallConfig::new(3, 1.0, 1.0, 2.0 * r * 1.01).is_ok());
    assert!(TwoBallConfig::new(3, 1.0, 1.0, f64::INFINITY).is_ok());
}

#[test]
fn separated_balls_and_the_cross_bound() {
    let p = params(3, 1.0);
    let cfg = TwoBallConfig::new(3, 1.0, 1.0, 10.0).unwrap();
    assert!(cfg.set_distance() >= 5.0);
    let e = two_ball_energy(&cfg, &p, &spec()).unwrap();
    assert!(e.bound_applies);
    assert!(e.riesz_cross <= 0.2 + 3.0 * e.riesz_cross_error, "{e:?}");
    // Newton: equal to m1 m2 / d for N = 3
    assert!((e.riesz_cross - 0.1).abs() < 1e-3);
    let sum = e.first.total + e.second.total;
    assert!((e.total - sum - e.riesz_cross + 2.0 * e.kernel_cross).abs() < 1e-12);
    assert_eq!(e.second.background, 0.0);
    let inf = two_ball_energy(&TwoBallConfig::new(3, 1.0, 1.0, f64::INFINITY).unwrap(), &p, &spec()).unwrap();
    assert_eq!(inf.total, sum);
    // far apart the total approaches the separated sum
    let far = two_ball_energy(&TwoBallConfig::new(3, 1.0, 1.0, 10.0 * 2.0 * radius(3, 2.0)).unwrap(), &p, &spec()).unwrap();
    assert!((far.total - sum).abs() < far.riesz_cross + 2.0 * far.kernel_cross + 3.0 * far.total_error);
}

#[test]
fn kernel_cross_decays_like_the_tail() {
    let p = params(2, 0.0);
    let at = |d: f64| two_ball_energy(&TwoBallConfig::new(2, 1.0, 1.0, d).unwrap(), &p, &spec()).unwrap().kernel_cross;
    let slope = (at(80.0) / at(20.0)).ln() / 4f64.ln();
    assert!((slope + 2.5).abs() < 0.05, "{slope}");
}

#[test]
fn total_is_nonincreasing_in_separation() {
    let p = params(3, 0.0);
    let touch = radius(3, 2.0) + radius(3, 3.0);
    let mut last = f64::INFINITY;
    let mut last_err = 0.0;
    for k in [2.0, 3.0, 5.0, 10.0, 40.0] {
        let e = two_ball_energy(&TwoBallConfig::new(3, 2.0, 3.0, k * touch).unwrap(), &p, &spec()).unwrap();
        assert!(e.total <= last + 3.0 * (e.total_error + last_err), "{k}: {e:?}");
        (last, last_err) = (e.total, e.total_error);
    }
}

#[test]
fn splitting_beats_the_ball_only_for_large_mass() {
    let p = params(3, 0.0);
    let mc = critical_mass(3, 0.5, 0.5, 0.0).unwrap().mass;
    let big = split_advantage(2.0 * mc, &p, &FamilyGrid::default(), &spec()).unwrap();
    assert!(big.split_wins(), "{:?}", (big.margin, big.margin_error));
    let small = split_advantage(mc / 100.0, &p, &FamilyGrid::default(), &spec()).unwrap();
    assert!(small.margin < 0.0 && !small.split_wins());
    let tiny = split_advantage(1e-2, &p, &small_grid(), &spec()).unwrap();
    assert!(tiny.margin < 0.0);
    for r in [&big, &small] {
        assert!(r.trace.windows(2).all(|w| w[1].best_so_far <= w[0].best_so_far));
        assert_eq!(r.trace.len(), 81);
    }
}

#[test]
fn degenerate_grid_is_a_single_evaluation() {
    let p = params(2, 1.0);
    let grid = FamilyGrid {
        fractions: vec![0.5],
        separations: SeparationGrid::Explicit(vec![4.0]),
    };
    let r = split_advantage(2.0, &p, &grid, &spec()).unwrap();
    let e = two_ball_energy(&TwoBallConfig::new(2, 1.0, 1.0, 4.0).unwrap(), &p, &spec()).unwrap();
    assert_eq!(r.best_energy, e.total);
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.margin, r.reference_energy - e.total);
}

#[test]
fn margin_grows_with_mass() {
    let p = params(3, 0.0);
    let mc = critical_mass(3, 0.5, 0.5, 0.0).unwrap().mass;
    let mut last: Option<FamilySearchResult> = None;
    for k in [0.25, 1.0, 2.0, 4.0] {
        let r = split_advantage(k * mc, &p, &small_grid(), &spec()).unwrap();
        if let Some(l) = &last {
            assert!(r.margin >= l.margin - 3.0 * (r.margin_error + l.margin_error));
        }
        last = Some(r);
    }
}

#[test]
fn weak_subadditivity() {
    let p = params(2, 0.5);
    for (m1, m2) in [(1.0, 2.0), (5.0, 0.5), (3.0, 3.0)] {
        let r = weak_subadditivity_probe(m1, m2, &p, &small_grid(), &spec()).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.residual <= 0.0);
    }
    let r = weak_subadditivity_probe(2.0, 1e-9, &p, &small_grid(), &spec()).unwrap();
    assert!(r.residual.abs() < 1e-4, "{r:?}");
}

#[test]
fn annealing_preserves_volume_and_improves() {
    let p = EnergyParams::new(KernelSpec::fractional(2, 0.5, 0.8).unwrap(), 0.0).unwrap();
    let spec = QuadratureSpec::monte_carlo(4_000, 3).sampled_only();
    // disc with a ragged boundary
    let v = VoxelShape::from_fn(2, &[14, 14], &[-0.7, -0.7], 0.1, |x| {
        let a = x[1].atan2(x[0]);
        x[0].hypot(x[1]) < 0.45 + 0.1 * (5.0 * a).sin()
    })
    .unwrap();
    let opts = AnnealOptions { steps: 60, initial_temperature: 0.05, seed: 4, ..Default::default() };
    let r = voxel_local_search(&v, &p, &opts, &spec).unwrap();
    assert_eq!(r.shape.occupied(), v.occupied());
    assert!(r.energy <= r.initial_energy);
    assert!(r.trace.windows(2).all(|w| w[1].best <= w[0].best));
    let again = voxel_local_search(&v, &p, &opts, &spec).unwrap();
    assert_eq!(again.trace, r.trace);
    let none = voxel_local_search(&v, &p, &AnnealOptions { steps: 0, ..opts }, &spec).unwrap();
    assert_eq!(none.shape, v);
    assert!(none.trace.is_empty());
}
