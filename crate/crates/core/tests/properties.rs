use nonlocal_drop::energy::{check_riesz_decomposition, riesz, scaling_report, EnergyParams};
use nonlocal_drop::geometry::{merge_intervals, Halfspace, Shape};
use nonlocal_drop::kernels::{epsilon_min, KernelSpec};
use nonlocal_drop::quadrature::QuadratureSpec;
use nonlocal_drop::slicing::{sphere_positive_integral, sphere_positive_quadrature, splitting_defect};
use nonlocal_drop::thresholds::{critical_mass, general_critical_mass, Convention};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn merged_intervals_are_sorted_and_disjoint(v in prop::collection::vec((-5.0f64..5.0, 0.0f64..2.0), 0..12)) {
        let iv: Vec<(f64, f64)> = v.iter().map(|&(a, w)| (a, a + w)).collect();
        let m = merge_intervals(iv.clone());
        for w in m.windows(2) {
            prop_assert!(w[0].1 < w[1].0);
        }
        prop_assert_eq!(merge_intervals(m.clone()), m.clone());
        let covered = |x: f64| iv.iter().any(|&(a, b)| a <= x && x < b);
        for &(a, b) in &m {
            prop_assert!(covered(0.5 * (a + b)));
        }
    }

    #[test]
    fn critical_mass_is_affine_in_a(s in 0.05f64..0.95, extra in 0.05f64..2.0, a in 0.0f64..10.0) {
        let eps = epsilon_min(3, s).unwrap() + extra;
        let m0 = critical_mass(3, s, eps, 0.0).unwrap().mass;
        let m1 = critical_mass(3, s, eps, 1.0).unwrap().mass;
        let ma = critical_mass(3, s, eps, a).unwrap().mass;
        prop_assert!(m0 > 0.0);
        prop_assert!((ma - (m0 + a * (m1 - m0))).abs() < 1e-9 * ma);
    }

    #[test]
    fn beta_one_root_is_the_closed_form(s in 0.05f64..0.95, extra in 0.05f64..2.0, a in 0.0f64..10.0) {
        let eps = epsilon_min(2, s).unwrap() + extra;
        let closed = critical_mass(2, s, eps, a).unwrap().mass;
        let root = general_critical_mass(2, s, eps, a, 1.0, Convention::Theorem).unwrap().mass;
        prop_assert!((root - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn sphere_integral_quadrature(x in prop::collection::vec(-3.0f64..3.0, 3)) {
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-2);
        let q = sphere_positive_quadrature(&x, &QuadratureSpec::tensor(1 << 16)).unwrap();
        let exact = sphere_positive_integral(&x).unwrap();
        prop_assert!((q.value - exact).abs() < 1e-3 * exact);
    }

    #[test]
    fn mirrored_cuts_agree(t in 0.0f64..std::f64::consts::TAU, l in -0.8f64..0.8) {
        let e = Shape::ball(&[0.2, -0.1], 1.0).unwrap();
        let p = EnergyParams::new(KernelSpec::fractional(2, 0.5, 0.8).unwrap(), 1.0).unwrap();
        let spec = QuadratureSpec::monte_carlo(4_000, 3);
        let (c, s) = (t.cos(), t.sin());
        let a = splitting_defect(&e, &[c, s], l, &p, &spec).unwrap();
        let b = splitting_defect(&e, &[-c, -s], -l, &p, &spec).unwrap();
        prop_assert!((a.lhs - b.lhs).abs() <= 1e-9 * a.lhs.max(1e-300));
        prop_assert!((a.background_term - b.background_plus).abs() <= 1e-9 * a.background_term.max(1e-300));
    }

    #[test]
    fn clipped_halves_add_up(t in 0.0f64..std::f64::consts::TAU, l in -1.5f64..1.5) {
        let e = Shape::ball(&[0.3, 0.0, 0.1], 1.0).unwrap();
        let h = Halfspace::from_direction(&[t.cos(), t.sin(), 0.3], l).unwrap();
        let (plus, minus) = e.slice(&h).unwrap();
        let total = e.volume().unwrap();
        prop_assert!((plus.volume().unwrap() + minus.volume().unwrap() - total).abs() < 1e-9 * total);
    }

    #[test]
    fn riesz_decomposition_of_separated_balls(r1 in 0.2f64..1.0, r2 in 0.2f64..1.0, gap in 0.05f64..2.0, t in 0.0f64..std::f64::consts::TAU) {
        let d = r1 + r2 + gap;
        let u = Shape::ball(&[0.0, 0.0], r1).unwrap();
        let w = Shape::ball(&[d * t.cos(), d * t.sin()], r2).unwrap();
        let c = check_riesz_decomposition(&u, &w, &QuadratureSpec::monte_carlo(4_000, 1)).unwrap();
        prop_assert!(c.residual.abs() <= 3.0 * c.combined_error + 1e-9 * c.terms[2][0]);
    }

    #[test]
    fn ball_terms_scale_exactly(lambda in 0.3f64..4.0, r in 0.2f64..2.0) {
        let e = Shape::ball(&[0.0, 0.0], r).unwrap();
        let p = EnergyParams::new(KernelSpec::fractional(2, 0.5, 0.8).unwrap(), 1.0).unwrap();
        prop_assume!((lambda - 1.0).abs() > 1e-3);
        let rep = scaling_report(&e, lambda, &p, &QuadratureSpec::default()).unwrap();
        prop_assert!((rep.perimeter.exponent.unwrap() - 1.5).abs() < 1e-8);
        prop_assert!((rep.riesz.exponent.unwrap() - 3.0).abs() < 1e-8);
        prop_assert!((rep.background.exponent.unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn riesz_is_monotone_under_inclusion(r in 0.2f64..1.0, k in 1.05f64..2.0) {
        let spec = QuadratureSpec::default();
        let small = riesz(&Shape::ball(&[0.0; 3], r).unwrap(), 1.0, &spec).unwrap().value;
        let big = riesz(&Shape::ball(&[0.0; 3], k * r).unwrap(), 1.0, &spec).unwrap().value;
        prop_assert!(big > small);
    }
}
