//! Subcommands. Each writes `<name>.csv` and `<name>.json` and returns the
//! JSON summary.

use crate::config::ExperimentConfig;
use crate::output::{num, Artifacts, Table};
use crate::verify::{run_suite, Check, VerifyOptions};
use crate::{CliError, Result};
use nonlocal_drop::energy::total_energy;
use nonlocal_drop::families::{split_advantage, voxel_local_search, weak_subadditivity_probe, TwoBallConfig};
use nonlocal_drop::geometry::{ball_of_volume, io, BallConfig, Shape, VoxelShape};
use nonlocal_drop::kernels::{validate_conditions, AuditPlan, Verdict};
use nonlocal_drop::slicing::{averaged_mass_bound, default_directions, scan, spread_directions};
use nonlocal_drop::thresholds::{critical_mass, general_critical_mass, Convention, ThresholdRecord};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Energy,
    CriticalMass,
    SliceScan,
    Family,
    Verify,
    KernelCheck,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Energy,
        Command::CriticalMass,
        Command::SliceScan,
        Command::Family,
        Command::Verify,
        Command::KernelCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::CriticalMass => "critical-mass",
            Command::SliceScan => "slice-scan",
            Command::Family => "family",
            Command::Verify => "verify",
            Command::KernelCheck => "kernel-check",
        }
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<Value> {
    let name = cmd.name();
    let (table, summary) = match cmd {
        Command::Energy => energy(cfg)?,
        Command::CriticalMass => threshold(cfg)?,
        Command::SliceScan => slice_scan(cfg)?,
        Command::Family => family(cfg, out)?,
        Command::Verify => verify(cfg)?,
        Command::KernelCheck => kernel_check(cfg)?,
    };
    out.csv(&format!("{name}.csv"), &table)?;
    let (_, value) = out.json(&format!("{name}.json"), name, &summary)?;
    if cmd == Command::Verify {
        let failed = summary["failed"].as_u64().unwrap_or(0) as usize;
        if failed > 0 {
            let total = summary["total"].as_u64().unwrap_or(0) as usize;
            return Err(CliError::ChecksFailed { failed, total });
        }
    }
    Ok(value)
}

fn energy(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let report = total_energy(&cfg.shape()?, &cfg.energy_params()?, &cfg.quadrature()?)?;
    let mut t = Table::new(&[
        "dimension", "kernel", "s", "epsilon", "lambda", "a", "alpha", "beta", "volume", "perimeter", "perimeter_error", "riesz",
        "riesz_error", "background", "background_error", "total", "total_error", "method", "seed", "samples", "warnings",
    ]);
    let r = &report;
    t.push(vec![
        r.dimension.to_string(),
        r.kernel.clone(),
        num(r.s),
        num(r.epsilon),
        num(r.lambda),
        num(r.a),
        num(r.alpha),
        num(r.beta),
        num(r.volume),
        num(r.perimeter),
        num(r.perimeter_error),
        num(r.riesz),
        num(r.riesz_error),
        num(r.background),
        num(r.background_error),
        num(r.total),
        num(r.total_error),
        r.method.to_string(),
        r.seed.to_string(),
        r.samples.to_string(),
        r.warnings.clone(),
    ]);
    Ok((t, serde_json::to_value(&report)?))
}

/// The closed form for `beta = 1` under the theorem convention, the root otherwise.
pub fn threshold_record(cfg: &ExperimentConfig) -> Result<ThresholdRecord> {
    let (n, s, eps, a) = (cfg.dimension, cfg.s, cfg.epsilon, cfg.a);
    Ok(if cfg.beta == 1.0 && cfg.convention == Convention::Theorem {
        critical_mass(n, s, eps, a)?
    } else {
        general_critical_mass(n, s, eps, a, cfg.beta, cfg.convention)?
    })
}

fn threshold(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let r = threshold_record(cfg)?;
    let mut t = Table::new(&[
        "dimension", "s", "epsilon", "a", "beta", "convention", "kind", "mass", "c1", "c2", "c3", "p", "residual", "scale",
    ]);
    let c = &r.constants;
    let (res, scale) = r.diagnostics.as_ref().map_or((0.0, f64::NAN), |d| (d.residual, d.scale));
    t.push(vec![
        r.dimension.to_string(),
        num(r.s),
        num(r.epsilon),
        num(r.a),
        num(r.beta),
        r.convention.to_string(),
        serde_json::to_value(r.kind)?.as_str().unwrap_or_default().to_string(),
        num(r.mass),
        num(c.c1),
        num(c.c2),
        num(c.c3),
        num(c.p),
        num(res),
        num(scale),
    ]);
    Ok((t, serde_json::to_value(&r)?))
}

fn slice_scan(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let n = cfg.dimension;
    let e = cfg.shape()?;
    let params = cfg.energy_params()?;
    let spec = cfg.quadrature()?;
    let dirs = if cfg.directions == 0 { default_directions(n)? } else { spread_directions(n, cfg.directions)? };
    let s = scan(&e, &dirs, &cfg.offset_grid(), &params, &spec)?;
    let avg = averaged_mass_bound(&e, &params, &spec)?;
    let mut header = vec!["direction"];
    header.extend(["nu_x", "nu_y", "nu_z"].iter().take(n));
    header.extend([
        "l", "lhs", "lhs_error", "kernel_term", "kernel_error", "background_term", "background_plus", "background_error", "rhs",
        "rhs_error", "defect", "defect_error",
    ]);
    let mut t = Table::new(&header);
    for r in &s.records {
        let mut row = vec![r.direction.to_string()];
        row.extend(r.nu[..n].iter().map(|&v| num(v)));
        row.extend(
            [
                r.l, r.lhs, r.lhs_error, r.kernel_term, r.kernel_error, r.background_term, r.background_plus, r.background_error, r.rhs,
                r.rhs_error, r.defect, r.defect_error,
            ]
            .map(num),
        );
        t.push(row);
    }
    let worst = s.records.get(s.worst);
    let summary = json!({
        "records": s.records.len(),
        "min_defect": worst.map(|r| r.defect),
        "min_defect_error": worst.map(|r| r.defect_error),
        "worst": worst,
        "signature": s.signature,
        "directions": s.directions,
        "averaged_bound": avg,
    });
    Ok((t, summary))
}

fn two_balls(c: &TwoBallConfig) -> Result<BallConfig> {
    let (r1, r2) = c.radii();
    let mut far = vec![0.0; c.dimension];
    far[0] = if c.separation.is_finite() { c.separation } else { 0.0 };
    let first = BallConfig::new(c.dimension, vec![(vec![0.0; c.dimension], r1)])?;
    if !c.separation.is_finite() {
        return Ok(first);
    }
    Ok(BallConfig::new(c.dimension, vec![(vec![0.0; c.dimension], r1), (far, r2)])?)
}

fn family(cfg: &ExperimentConfig, out: &mut Artifacts) -> Result<(Table, Value)> {
    let params = cfg.energy_params()?;
    let spec = cfg.quadrature()?;
    match cfg.family_mode.as_str() {
        "advantage" => {
            let r = split_advantage(cfg.mass, &params, &cfg.family_grid(), &spec)?;
            let mut t = Table::new(&["m1", "m2", "separation", "energy", "error", "best_so_far"]);
            for e in &r.trace {
                t.push([e.m1, e.m2, e.separation, e.energy, e.error, e.best_so_far].map(num).to_vec());
            }
            let mut buf = Vec::new();
            io::write_balls(&mut buf, &two_balls(&r.best)?)?;
            out.file("family_best.balls.csv", &buf)?;
            let mut v = serde_json::to_value(&r)?;
            if let Value::Object(m) = &mut v {
                m.remove("trace");
                m.insert("split_wins".into(), r.split_wins().into());
                m.insert("best_separation".into(), num(r.best.separation).into());
            }
            Ok((t, v))
        }
        "subadditivity" => {
            let p = weak_subadditivity_probe(cfg.m1, cfg.m2, &params, &cfg.family_grid(), &spec)?;
            let mut t = Table::new(&[
                "m1", "m2", "grid_min", "grid_error", "first", "first_error", "second", "second_error", "combined", "combined_error",
                "residual", "residual_error", "grid_gap", "holds",
            ]);
            let mut row = [
                p.m1, p.m2, p.grid_min, p.grid_error, p.first, p.first_error, p.second, p.second_error, p.combined, p.combined_error,
                p.residual, p.residual_error, p.grid_gap,
            ]
            .map(num)
            .to_vec();
            row.push(p.holds().to_string());
            t.push(row);
            let mut v = serde_json::to_value(&p)?;
            if let Value::Object(m) = &mut v {
                m.insert("holds".into(), p.holds().into());
            }
            Ok((t, v))
        }
        "anneal" => {
            let start = match cfg.shape()? {
                Shape::Voxels(v) => v,
                other => {
                    let r = (cfg.mass / nonlocal_drop::constants::ball_volume(cfg.dimension)).powf(1.0 / cfg.dimension as f64);
                    let shape = if other.is_empty() { Shape::Balls(ball_of_volume(cfg.dimension, cfg.mass)?) } else { other };
                    VoxelShape::voxelize(&shape, cfg.anneal_spacing * r)?
                }
            };
            let r = voxel_local_search(&start, &params, &cfg.anneal_options(), &spec.sampled_only())?;
            let mut t = Table::new(&["step", "temperature", "proposed", "accepted", "current", "best"]);
            for s in &r.trace {
                t.push(vec![
                    s.step.to_string(),
                    num(s.temperature),
                    num(s.proposed),
                    s.accepted.to_string(),
                    num(s.current),
                    num(s.best),
                ]);
            }
            let mut buf = Vec::new();
            io::write_voxels(&mut buf, &r.shape)?;
            out.file("family_best.vox", &buf)?;
            let summary = json!({
                "initial_energy": r.initial_energy,
                "energy": r.energy,
                "steps": r.trace.len(),
                "accepted": r.trace.iter().filter(|s| s.accepted).count(),
                "volume": r.shape.volume(),
                "shape_file": "family_best.vox",
            });
            Ok((t, summary))
        }
        other => Err(CliError::Config(format!(
            "unknown family_mode `{other}` (known: advantage, subadditivity, anneal)"
        ))),
    }
}

fn verify(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let opts = VerifyOptions::from(cfg);
    let mut checks: Vec<Check> = Vec::new();
    let mut suites = Vec::new();
    for name in &cfg.suites {
        let c = run_suite(name, &opts)?;
        suites.push(json!({
            "suite": name,
            "checks": c.len(),
            "failed": c.iter().filter(|x| !x.passed).count(),
        }));
        checks.extend(c);
    }
    let mut t = Table::new(&["suite", "id", "value", "reference", "residual", "tolerance", "passed"]);
    for c in &checks {
        t.push(vec![
            c.suite.to_string(),
            c.id.clone(),
            num(c.value),
            num(c.reference),
            num(c.residual),
            num(c.tolerance),
            c.passed.to_string(),
        ]);
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    let summary = json!({
        "total": checks.len(),
        "failed": failed.len(),
        "suites": suites,
        "failures": failed,
    });
    Ok((t, summary))
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail { .. } => "fail",
        Verdict::NotChecked { .. } => "not-checked",
        Verdict::Inconclusive { .. } => "inconclusive",
    }
}

fn kernel_check(cfg: &ExperimentConfig) -> Result<(Table, Value)> {
    let k = cfg.kernel_spec()?;
    let plan = AuditPlan {
        seed: cfg.seed,
        ..AuditPlan::default()
    };
    let report = validate_conditions(&k, &plan);
    let mut t = Table::new(&["condition", "verdict", "worst_margin", "worst_point", "detail"]);
    for r in &report.results {
        let detail = match &r.verdict {
            Verdict::NotChecked { reason } | Verdict::Inconclusive { reason } => reason.clone(),
            Verdict::Fail { margin, .. } => format!("margin {}", num(*margin)),
            Verdict::Pass => String::new(),
        };
        let point = r
            .worst_point
            .as_ref()
            .map(|p| p.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        t.push(vec![
            serde_json::to_value(r.condition)?.as_str().unwrap_or_default().to_string(),
            verdict_name(&r.verdict).to_string(),
            num(r.worst_margin),
            point,
            detail,
        ]);
    }
    let mut v = serde_json::to_value(&report)?;
    if let Value::Object(m) = &mut v {
        m.insert("all_pass".into(), report.all_pass().into());
    }
    Ok((t, v))
}
