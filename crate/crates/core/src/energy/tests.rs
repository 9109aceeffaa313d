use super::*;
use crate::geometry::VoxelShape;
use std::f64::consts::PI;

fn frac(n: usize) -> KernelSpec {
    KernelSpec::fractional(n, 0.5, 0.8).unwrap()
}

fn params(n: usize, a: f64) -> EnergyParams {
    EnergyParams::new(frac(n), a).unwrap()
}

#[test]
fn ball_perimeter_frozen_values() {
    let spec = QuadratureSpec::default();
    // N = 2, s = 1/2: 8 pi sqrt(2) B(1/2, 5/4)
    let oracle = 8.0 * PI * 2f64.sqrt() * statrs::function::beta::beta(0.5, 1.25);
    let p = perimeter(&Shape::ball(&[0.0, 0.0], 1.0).unwrap(), &params(2, 0.0), &spec).unwrap();
    assert!((p.value - oracle).abs() < 1e-10 * oracle, "{p:?} {oracle}");
    assert!((p.value - 62.130_638_777_779_80).abs() < 1e-9);
    // N = 3, s = 1/2, frozen from a 30-digit evaluation of the same radial integral
    let p = perimeter(&Shape::ball(&[0.0; 3], 1.0).unwrap(), &params(3, 0.0), &spec).unwrap();
    assert!((p.value - 178.658_923_510_740_44).abs() < 1e-9, "{p:?}");
}

#[test]
fn sampled_perimeter_agrees_with_ball_path() {
    let e = Shape::ball(&[0.3, -0.2], 1.0).unwrap();
    let exact = perimeter(&e, &params(2, 0.0), &QuadratureSpec::default()).unwrap();
    let mc = perimeter(&e, &params(2, 0.0), &QuadratureSpec::monte_carlo(200_000, 7).sampled_only()).unwrap();
    assert!((mc.value - exact.value).abs() < 3.0 * mc.error, "{mc:?} {exact:?}");
    let t = perimeter(&e, &params(2, 0.0), &QuadratureSpec::tensor(1 << 18).sampled_only()).unwrap();
    assert!((t.value - exact.value).abs() < 1e-2 * exact.value, "{t:?}");
}

#[test]
fn coulomb_self_energy_of_unit_ball() {
    let e = Shape::ball(&[0.0; 3], 1.0).unwrap();
    let v = riesz(&e, 1.0, &QuadratureSpec::default()).unwrap();
    assert!((v.value - 16.0 * PI * PI / 15.0).abs() < 1e-11, "{v:?}");
    let mc = riesz(&e, 1.0, &QuadratureSpec::monte_carlo(100_000, 1).sampled_only()).unwrap();
    assert!((mc.value - 16.0 * PI * PI / 15.0).abs() < 3.0 * mc.error);
    // unit disc: the mean inverse distance of two uniform points is 16 / (3 pi)
    let d = riesz(&Shape::ball(&[0.0, 0.0], 1.0).unwrap(), 1.0, &QuadratureSpec::default()).unwrap();
    assert!((d.value - 0.5 * PI * PI * 16.0 / (3.0 * PI)).abs() < 1e-11, "{d:?}");
}

#[test]
fn riesz_exponent_range() {
    let e = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
    let spec = QuadratureSpec::default();
    assert!(riesz(&e, 2.0, &spec).is_err());
    assert!(riesz(&e, 0.0, &spec).is_err());
    let v = riesz(&e, 0.5, &spec).unwrap();
    assert!(v.warnings.iter().any(|w| matches!(w, Warning::Exploratory { .. })));
    assert!(riesz(&e, 1.0, &spec).unwrap().warnings.is_empty());
}

#[test]
fn background_closed_forms() {
    let spec = QuadratureSpec::default();
    for n in [2usize, 3] {
        let b = Shape::ball(&vec![0.0; n], 1.0).unwrap();
        assert!((background(&b, 1.0, &spec).unwrap().value - 2.0 * PI).abs() < 1e-12);
        let sampled = background(&b, 1.0, &spec.clone().sampled_only()).unwrap();
        assert!((sampled.value - 2.0 * PI).abs() < 1e-9, "{sampled:?}");
        // beta = 0 is the volume
        let v = background(&b, 0.0, &spec).unwrap().value;
        assert!((v - b.volume().unwrap()).abs() < 1e-12);
    }
    let r = background(&Shape::ball(&[0.0, 0.0], 2.5).unwrap(), 1.0, &spec).unwrap();
    assert!((r.value - 5.0 * PI).abs() < 1e-12);
}

#[test]
fn shifted_ball_background_paths_agree_and_decrease() {
    let spec = QuadratureSpec::monte_carlo(100_000, 2);
    let mut last = f64::INFINITY;
    for shift in [0.0, 0.5, 1.5, 4.0] {
        let b = Shape::ball(&[shift, 0.0, 0.0], 1.0).unwrap();
        let exact = background(&b, 1.0, &spec).unwrap();
        let rays = background(&b, 1.0, &spec.clone().sampled_only()).unwrap();
        assert!((exact.value - rays.value).abs() < 3.0 * rays.error + 1e-9, "{exact:?} {rays:?}");
        assert!(exact.value < last);
        last = exact.value;
    }
}

#[test]
fn singular_background() {
    let spec = QuadratureSpec::default();
    let b = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
    assert!(matches!(background(&b, 2.5, &spec), Err(Error::NonIntegrable(_))));
    assert!(background(&b, 3.0, &spec).is_err());
    let v = Shape::Voxels(VoxelShape::from_fn(2, &[8, 8], &[-1.0, -1.0], 0.25, |_| true).unwrap());
    let r = background(&v, 2.5, &spec).unwrap();
    assert!(r.value.is_finite());
    assert!(r.warnings.iter().any(|w| matches!(w, Warning::SingularCell { .. })));
}

#[test]
fn total_energy_assembly() {
    let e = Shape::ball(&[0.0; 3], (10.0 / ball_volume(3)).cbrt()).unwrap();
    let spec = QuadratureSpec::default();
    let p = params(3, 1.0);
    let rep = total_energy(&e, &p, &spec).unwrap();
    let pp = perimeter(&e, &p, &spec).unwrap().value;
    let vv = riesz(&e, 1.0, &spec).unwrap().value;
    let rr = background(&e, 1.0, &spec).unwrap().value;
    assert_eq!(rep.total, pp + vv - rr);
    assert!((rep.volume - 10.0).abs() < 1e-12);
    let zero_a = total_energy(&e, &params(3, 0.0), &spec).unwrap();
    assert_eq!(zero_a.total, zero_a.perimeter + zero_a.riesz);
    let empty = total_energy(&Shape::empty(3), &p, &spec).unwrap();
    assert_eq!(empty.total, 0.0);
}

#[test]
fn params_validation() {
    assert!(EnergyParams::new(frac(2), -1.0).is_err());
    assert!(params(2, 0.0).with_alpha(2.0).is_err());
    assert!(params(2, 0.0).with_beta(3.0).is_err());
    assert!(params(2, 0.0).with_beta(2.9).is_ok());
}

#[test]
fn translation_invariance() {
    let spec = QuadratureSpec::monte_carlo(50_000, 4).sampled_only();
    let v = VoxelShape::from_fn(2, &[10, 10], &[0.0, 0.0], 0.1, |x| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) < 0.16).unwrap();
    let e = Shape::Voxels(v);
    let t = e.translate(&[3.0, -1.0]).unwrap();
    let p = params(2, 0.0);
    for f in [perimeter as fn(&Shape, &EnergyParams, &QuadratureSpec) -> Result<IntegralEstimate>] {
        let a = f(&e, &p, &spec).unwrap();
        let b = f(&t, &p, &spec).unwrap();
        // identical relative line sets, so the values agree to rounding
        assert!((a.value - b.value).abs() < 1e-9 * a.value);
    }
    let a = riesz(&e, 1.0, &spec).unwrap();
    let b = riesz(&t, 1.0, &spec).unwrap();
    assert!((a.value - b.value).abs() < 1e-9 * a.value);
}

#[test]
fn interaction_of_far_balls() {
    let spec = QuadratureSpec::monte_carlo(100_000, 3);
    let r = (1.0 / ball_volume(3)).cbrt();
    let u = Shape::ball(&[0.0; 3], r).unwrap();
    let w = Shape::ball(&[10.0, 0.0, 0.0], r).unwrap();
    let i = interaction(&u, &w, Coupling::Riesz { alpha: 1.0 }, &spec).unwrap();
    assert!((i.value - 0.1).abs() < 0.01, "{i:?}");
    assert!(i.error < 1e-4, "{i:?}");
    let empty = interaction(&u, &Shape::empty(3), Coupling::Riesz { alpha: 1.0 }, &spec).unwrap();
    assert_eq!(empty.value, 0.0);
    let over = Shape::ball(&[0.5 * r, 0.0, 0.0], r).unwrap();
    assert!(matches!(
        interaction(&u, &over, Coupling::Riesz { alpha: 1.0 }, &spec),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn decompositions_for_disjoint_balls() {
    let spec = QuadratureSpec::monte_carlo(50_000, 11);
    let u = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
    let w = Shape::ball(&[2.5, 0.3], 0.7).unwrap();
    let p = check_perimeter_decomposition(&u, &w, &frac(2), &spec).unwrap();
    assert!(p.residual.abs() <= 3.0 * p.combined_error, "{p:?}");
    assert!(p.residual.abs() < 1e-9 * p.terms[2][0]);
    let v = check_riesz_decomposition(&u, &w, &spec).unwrap();
    assert!(v.residual.abs() < 1e-9 * v.terms[2][0], "{v:?}");
    let none = check_perimeter_decomposition(&u, &Shape::empty(2), &frac(2), &spec).unwrap();
    assert_eq!(none.residual, 0.0);
    let none = check_riesz_decomposition(&Shape::empty(2), &w, &spec).unwrap();
    assert_eq!(none.residual, 0.0);
}

#[test]
fn decomposition_rejects_overlap() {
    let spec = QuadratureSpec::monte_carlo(10_000, 1);
    let u = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
    let w = Shape::ball(&[1.0, 0.0], 1.0).unwrap();
    assert!(matches!(check_riesz_decomposition(&u, &w, &spec), Err(Error::Precondition(_))));
}

#[test]
fn scaling_of_balls_is_exact() {
    let e = Shape::ball(&[0.4, 0.1], 1.0).unwrap();
    let rep = scaling_report(&e, 2.0, &params(2, 1.0), &QuadratureSpec::default()).unwrap();
    assert!((rep.perimeter.exponent.unwrap() - 1.5).abs() < 1e-9);
    assert!((rep.riesz.exponent.unwrap() - 3.0).abs() < 1e-9);
    assert!((rep.background.exponent.unwrap() - 1.0).abs() < 1e-9);
    assert!(rep.perimeter_exact);
    let one = scaling_report(&e, 1.0, &params(2, 1.0), &QuadratureSpec::default()).unwrap();
    assert_eq!(one.perimeter.ratio, 1.0);
    assert_eq!(one.riesz.ratio, 1.0);
    assert_eq!(one.background.ratio, 1.0);
    assert!(one.riesz.exponent.is_none());
}

#[test]
fn capped_kernel_breaks_perimeter_scaling() {
    let k = KernelSpec::truncated(2, 0.5, 0.8, 1.0).unwrap();
    let e = Shape::ball(&[0.0, 0.0], 1.0).unwrap();
    let rep = scaling_report(&e, 2.0, &EnergyParams::new(k, 0.0).unwrap(), &QuadratureSpec::default()).unwrap();
    assert!(!rep.perimeter_exact);
    assert!((rep.perimeter.exponent.unwrap() - 1.5).abs() > 0.05, "{rep:?}");
}
