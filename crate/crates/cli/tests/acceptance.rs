//! Acceptance criteria AC1 to AC12. Prints one PASS/FAIL line per criterion
//! and exits nonzero if any fails.

use ndrop_cli::verify::{self, Check, VerifyOptions};
use nonlocal_drop::energy::{background, EnergyParams};
use nonlocal_drop::families::{split_advantage, weak_subadditivity_probe, FamilyGrid, SeparationGrid};
use nonlocal_drop::geometry::{ball_of_volume, Shape};
use nonlocal_drop::kernels::KernelSpec;
use nonlocal_drop::quadrature::QuadratureSpec;
use nonlocal_drop::slicing::{sphere_positive_quadrature, splitting_defect};
use nonlocal_drop::thresholds::{critical_mass, general_critical_mass, Convention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

/// `m_c(3, 1/2, 1/2, 0)` to 18 digits from a 40-digit evaluation.
const M_C_40_DIGITS: f64 = 224.495699389689636;
const AC1_TOL: f64 = 0.01;
const AC2_REL: f64 = 1e-12;
const AC2_RESIDUAL: f64 = 1e-10;
const AC3_PAIRS: usize = 1_000_000;
const AC3_REL: f64 = 0.01;
const AC4_REL: f64 = 0.005;
const AC5_PAIRS: usize = 50;
const AC5_GRID: usize = 64;
const AC7_POINTS: usize = 20;
const AC7_REL: f64 = 1e-3;
const AC9_SHAPES: usize = 100;
const AC10_SIGMAS: f64 = 3.0;
const AC11_PAIRS: usize = 10;
const AC11_SIGMAS: f64 = 3.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Criterion = fn() -> Result<Outcome, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Closed form written out for N = 3, s = 1/2: `C2 = 8 pi sqrt(1 + eps)`,
/// `C1 = 1/2 - (1 + eps)^{-5/2}`.
fn ac1() -> Result<Outcome, String> {
    let eps: f64 = 0.5;
    let oracle = 8.0 * PI * (1.0 + eps).sqrt() / (0.5 - (1.0 + eps).powf(-2.5));
    let m = critical_mass(3, 0.5, eps, 0.0).map_err(err)?.mass;
    let ok = (m - M_C_40_DIGITS).abs() <= AC1_TOL && (oracle - M_C_40_DIGITS).abs() <= 1e-10;
    Ok(outcome(ok, format!("m_c = {m:.12}, oracle {oracle:.12}, reference {M_C_40_DIGITS}")))
}

fn ac2() -> Result<Outcome, String> {
    let cases = [(3, 0.5, 0.5, 0.0), (3, 0.5, 0.5, 2.0), (2, 0.3, 1.0, 1.0), (3, 0.9, 4.0, 0.5), (2, 0.7, 2.0, 10.0)];
    let (mut worst_rel, mut worst_res) = (0.0f64, 0.0f64);
    for (n, s, eps, a) in cases {
        let closed = critical_mass(n, s, eps, a).map_err(err)?;
        let root = general_critical_mass(n, s, eps, a, 1.0, Convention::Theorem).map_err(err)?;
        worst_rel = worst_rel.max((root.mass - closed.mass).abs() / closed.mass);
        let d = root.diagnostics.ok_or("root without diagnostics")?;
        worst_res = worst_res.max(d.residual.abs() / d.scale);
    }
    let ok = worst_rel <= AC2_REL && worst_res <= AC2_RESIDUAL;
    Ok(outcome(ok, format!("max relative gap {worst_rel:.2e}, max |phi| / scale {worst_res:.2e}")))
}

fn ac3() -> Result<Outcome, String> {
    let o = VerifyOptions { golden_pairs: AC3_PAIRS, ..options() };
    let checks = verify::golden(&o).map_err(err)?;
    let c = checks.iter().find(|c| c.id == "riesz-n3").ok_or("missing riesz check")?;
    let rel = c.residual.abs() / c.reference;
    Ok(outcome(rel <= AC3_REL, format!("V1(B1) = {:.5}, exact {:.5}, relative {rel:.2e}", c.value, c.reference)))
}

fn ac4() -> Result<Outcome, String> {
    let spec = QuadratureSpec::default().sampled_only();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        let r = background(&Shape::ball(&vec![0.0; n], 1.0).map_err(err)?, 1.0, &spec).map_err(err)?;
        let rel = (r.value - 2.0 * PI).abs() / (2.0 * PI);
        ok &= rel <= AC4_REL;
        parts.push(format!("N={n}: {:.5} ({rel:.1e})", r.value));
    }
    Ok(outcome(ok, parts.join(", ")))
}

fn options() -> VerifyOptions {
    VerifyOptions {
        identity_pairs: AC5_PAIRS,
        identity_grid: AC5_GRID,
        isoperimetry_shapes: AC9_SHAPES,
        sphere_points: AC7_POINTS,
        layer_points: 101,
        golden_pairs: AC3_PAIRS,
        budget: 100_000,
        seed: 0,
    }
}

fn summarize(checks: &[Check]) -> (bool, String) {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    (failed.is_empty(), format!("{} checks, {} failed {:?}", checks.len(), failed.len(), failed))
}

fn ac5() -> Result<Outcome, String> {
    let checks = verify::identity(&options()).map_err(err)?;
    let worst = checks.iter().map(|c| c.residual.abs() / c.tolerance.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let (ok, s) = summarize(&checks);
    Ok(outcome(ok && checks.len() == 2 * AC5_PAIRS, format!("{s}, worst |residual| / 3 sigma = {worst:.2}")))
}

fn ac6() -> Result<Outcome, String> {
    let checks = verify::scaling(&options()).map_err(err)?;
    let (ok, s) = summarize(&checks);
    let fitted: Vec<String> = checks.iter().map(|c| format!("{} {:.4}", c.id, c.value)).collect();
    Ok(outcome(ok, format!("{s}; {}", fitted.join(", "))))
}

fn ac7() -> Result<Outcome, String> {
    let mut checks = verify::sphere(&options()).map_err(err)?;
    // unit vectors: 2 in the plane, pi in space
    let spec = QuadratureSpec::tensor(1 << 16);
    for (x, exact) in [(vec![0.6, 0.8], 2.0), (vec![0.0, 0.6, 0.8], PI)] {
        let q = sphere_positive_quadrature(&x, &spec).map_err(err)?;
        let r = q.value - exact;
        checks.push(Check {
            suite: "sphere",
            id: format!("unit-n{}", x.len()),
            value: q.value,
            reference: exact,
            residual: r,
            tolerance: AC7_REL * exact,
            passed: r.abs() <= AC7_REL * exact,
        });
    }
    let worst = checks.iter().map(|c| c.residual.abs() / c.reference).fold(0.0, f64::max);
    let (ok, s) = summarize(&checks);
    Ok(outcome(ok, format!("{s}, worst relative {worst:.1e}")))
}

fn ac8() -> Result<Outcome, String> {
    let checks = verify::layer_cake(&options()).map_err(err)?;
    let strict = checks.iter().filter(|c| c.id.ends_with("refinement") && c.value <= c.reference).count();
    let (ok, s) = summarize(&checks);
    Ok(outcome(ok, format!("{s}, {strict}/4 residuals strictly smaller after refinement")))
}

fn ac9() -> Result<Outcome, String> {
    let checks = verify::isoperimetry(&options()).map_err(err)?;
    let min = checks.iter().map(|c| c.residual / c.value).fold(f64::INFINITY, f64::min);
    let (ok, s) = summarize(&checks);
    Ok(outcome(ok && checks.len() == AC9_SHAPES, format!("{s}, smallest slack / perimeter {min:.3}")))
}

fn ac10() -> Result<Outcome, String> {
    let params = EnergyParams::new(KernelSpec::fractional(3, 0.5, 0.5).map_err(err)?, 0.0).map_err(err)?;
    let spec = QuadratureSpec::default();
    let mc = critical_mass(3, 0.5, 0.5, 0.0).map_err(err)?.mass;
    let big = split_advantage(2.0 * mc, &params, &FamilyGrid::default(), &spec).map_err(err)?;
    let small = split_advantage(mc / 100.0, &params, &FamilyGrid::default(), &spec).map_err(err)?;
    let defect = |m: f64| {
        let ball = Shape::Balls(ball_of_volume(3, m).map_err(err)?);
        splitting_defect(&ball, &[0.0, 0.0, 1.0], 0.0, &params, &spec).map_err(err)
    };
    let (db, ds) = (defect(2.0 * mc)?, defect(mc / 100.0)?);
    let ok = big.margin > AC10_SIGMAS * big.margin_error
        && !(small.margin > AC10_SIGMAS * small.margin_error)
        && db.defect < -AC10_SIGMAS * db.defect_error
        && ds.defect > AC10_SIGMAS * ds.defect_error;
    Ok(outcome(
        ok,
        format!(
            "margin(2 m_c) = {:.4} +- {:.1e}, margin(m_c/100) = {:.4}, defect(2 m_c) = {:.4} +- {:.1e}, defect(m_c/100) = {:.4} +- {:.1e}",
            big.margin, big.margin_error, small.margin, db.defect, db.defect_error, ds.defect, ds.defect_error
        ),
    ))
}

fn ac11() -> Result<Outcome, String> {
    let params = EnergyParams::new(KernelSpec::fractional(3, 0.5, 0.5).map_err(err)?, 1.0).map_err(err)?;
    let spec = QuadratureSpec::monte_carlo(20_000, 11);
    let grid = FamilyGrid {
        fractions: vec![0.25, 0.5, 0.75],
        separations: SeparationGrid::LogSpan {
            points: 4,
            gap: 1e-3,
            far: 1e2,
            infinite: true,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::NEG_INFINITY;
    let mut grid_beats = 0;
    let mut ok = true;
    for _ in 0..AC11_PAIRS {
        let (m1, m2) = (rng.random_range(0.1..50.0), rng.random_range(0.1..50.0));
        let p = weak_subadditivity_probe(m1, m2, &params, &grid, &spec).map_err(err)?;
        ok &= p.residual <= AC11_SIGMAS * p.residual_error;
        worst = worst.max(p.residual / p.residual_error.max(f64::MIN_POSITIVE));
        if p.grid_gap < 0.0 {
            grid_beats += 1;
        }
    }
    Ok(outcome(
        ok,
        format!("{AC11_PAIRS} pairs, largest residual / sigma = {worst:.3e}, finite grid below the separated sum in {grid_beats}"),
    ))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_ndrop"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("NDROP_OUTPUT_DIR")
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(err)?;
    if status.success() { Ok(()) } else { Err(format!("`ndrop {}` exited with {status}", args.join(" "))) }
}

fn ac12() -> Result<Outcome, String> {
    let runs: [(&str, &[&str]); 6] = [
        ("energy", &["--set", "dimension=2", "--set", "epsilon=0.8", "--set", "a=1.0", "--set", "center=[0.3, 0.1]", "--set", "exact_ball_paths=false"]),
        ("critical-mass", &["--set", "beta=0.5"]),
        ("slice-scan", &["--set", "dimension=2", "--set", "epsilon=0.8", "--set", "mass=3.0", "--set", "a=1.0", "--set", "budget=5000", "--set", "directions=4", "--set", "offset_points=9"]),
        ("family", &["--set", "mass=20.0", "--set", "budget=5000", "--set", "fractions=[0.3, 0.5]", "--set", "separation_points=3"]),
        ("verify", &["--set", "budget=5000", "--set", "identity_pairs=2", "--set", "isoperimetry_shapes=2", "--set", "sphere_points=4", "--set", "suites=[\"identity\", \"isoperimetry\", \"sphere\", \"golden\"]"]),
        ("kernel-check", &["--set", "kernel=truncated", "--set", "kernel_cap=5.0"]),
    ];
    let root = tempfile::tempdir().map_err(err)?;
    let mut differing = Vec::new();
    for (cmd, extra) in runs {
        let mut args = vec![cmd];
        args.extend_from_slice(extra);
        let csv = format!("{cmd}.csv");
        let (a, b) = (root.path().join(format!("{cmd}-1")), root.path().join(format!("{cmd}-2")));
        run_cli(&args, &a)?;
        run_cli(&args, &b)?;
        let (x, y) = (std::fs::read(a.join(&csv)).map_err(err)?, std::fs::read(b.join(&csv)).map_err(err)?);
        if x != y || x.is_empty() {
            differing.push(cmd);
        }
    }
    Ok(outcome(differing.is_empty(), format!("6 subcommands run twice, differing CSV: {differing:?}")))
}

fn main() {
    let criteria: [(&str, Criterion, Duration); 12] = [
        ("AC1 critical mass closed form", ac1, Duration::from_secs(1)),
        ("AC2 beta = 1 consistency", ac2, Duration::from_secs(1)),
        ("AC3 Riesz golden value", ac3, Duration::from_secs(10)),
        ("AC4 background golden values", ac4, Duration::from_secs(5)),
        ("AC5 decomposition identities", ac5, Duration::from_secs(120)),
        ("AC6 scaling law", ac6, Duration::from_secs(60)),
        ("AC7 sphere integral", ac7, Duration::from_secs(10)),
        ("AC8 layer-cake identities", ac8, Duration::from_secs(60)),
        ("AC9 isoperimetric suite", ac9, Duration::from_secs(180)),
        ("AC10 nonexistence signature", ac10, Duration::from_secs(300)),
        ("AC11 weak subadditivity", ac11, Duration::from_secs(180)),
        ("AC12 reproducible CLI output", ac12, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (name, f, limit) in criteria {
        let t = Instant::now();
        let r = f();
        let dt = t.elapsed();
        let (passed, detail) = match r {
            Ok(o) => (o.passed && dt <= limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "{} {name}: {detail} [{:.2}s, limit {}s]",
            if passed { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failures} failed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
