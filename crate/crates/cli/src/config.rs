//! Experiment configuration: flat TOML keys, every key optional.
//!
//! Unknown keys are rejected all at once. `--set key=value` overrides are
//! parsed as TOML values, falling back to a bare string.

use crate::{CliError, Result};
use nonlocal_drop::energy::EnergyParams;
use nonlocal_drop::families::{AnnealOptions, FamilyGrid, SeparationGrid};
use nonlocal_drop::geometry::{ball_of_volume, io, Shape};
use nonlocal_drop::kernels::{KernelSpec, RadialTable, TailRule};
use nonlocal_drop::quadrature::{Method, QuadratureSpec};
use nonlocal_drop::slicing::OffsetGrid;
use nonlocal_drop::thresholds::Convention;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

pub const OUTPUT_DIR_VAR: &str = "NDROP_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    pub s: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub amplitude: f64,
    /// `fractional`, `truncated` or `tabulated`.
    pub kernel: String,
    pub kernel_cap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_table: Option<String>,
    pub kernel_tail: TailRule,

    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    pub convention: Convention,

    /// `ball`, `empty` or `file`.
    pub shape: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shape_file: Option<String>,
    pub mass: f64,
    pub center: Vec<f64>,

    pub method: Method,
    pub budget: usize,
    pub seed: u64,
    pub exact_ball_paths: bool,

    /// Number of scan directions; 0 picks the default set.
    pub directions: usize,
    pub offsets: Vec<f64>,
    pub offset_points: usize,
    pub offset_padding: f64,

    /// `advantage`, `subadditivity` or `anneal`.
    pub family_mode: String,
    pub fractions: Vec<f64>,
    pub separation_points: usize,
    pub separation_gap: f64,
    pub separation_far: f64,
    pub include_infinite: bool,
    pub m1: f64,
    pub m2: f64,
    pub anneal_steps: usize,
    pub anneal_temperature: f64,
    pub anneal_ratio: f64,
    pub anneal_epoch: usize,
    /// Voxel spacing of the annealing start, as a fraction of the ball radius.
    pub anneal_spacing: f64,

    /// Subset of `identity`, `isoperimetry`, `scaling`, `sphere`, `layer-cake`, `golden`.
    pub suites: Vec<String>,
    pub identity_pairs: usize,
    pub identity_grid: usize,
    pub isoperimetry_shapes: usize,
    pub sphere_points: usize,
    pub layer_points: usize,
    pub golden_pairs: usize,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        let g = FamilyGrid::default();
        let (points, gap, far, infinite) = match g.separations {
            SeparationGrid::LogSpan { points, gap, far, infinite } => (points, gap, far, infinite),
            SeparationGrid::Explicit(_) => unreachable!("default grid is log-spaced"),
        };
        let a = AnnealOptions::default();
        ExperimentConfig {
            dimension: 3,
            s: 0.5,
            epsilon: 0.5,
            lambda: 1.0,
            amplitude: 1.0,
            kernel: "fractional".into(),
            kernel_cap: 1.0,
            kernel_table: None,
            kernel_tail: TailRule::PowerLaw,
            a: 0.0,
            alpha: 1.0,
            beta: 1.0,
            convention: Convention::Theorem,
            shape: "ball".into(),
            shape_file: None,
            mass: 1.0,
            center: Vec::new(),
            method: q.method,
            budget: q.budget,
            seed: q.seed,
            exact_ball_paths: q.exact_ball_paths,
            directions: 0,
            offsets: Vec::new(),
            offset_points: 64,
            offset_padding: 0.1,
            family_mode: "advantage".into(),
            fractions: g.fractions,
            separation_points: points,
            separation_gap: gap,
            separation_far: far,
            include_infinite: infinite,
            m1: 1.0,
            m2: 2.0,
            anneal_steps: a.steps,
            anneal_temperature: a.initial_temperature,
            anneal_ratio: a.ratio,
            anneal_epoch: a.epoch,
            anneal_spacing: 0.15,
            suites: crate::verify::SUITES.iter().map(|s| s.to_string()).collect(),
            identity_pairs: 10,
            identity_grid: 32,
            isoperimetry_shapes: 20,
            sphere_points: 20,
            layer_points: 101,
            golden_pairs: 1_000_000,
            output_dir: None,
        }
    }
}

fn known_keys() -> Vec<String> {
    let mut c = ExperimentConfig::default();
    c.kernel_table = Some(String::new());
    c.shape_file = Some(String::new());
    c.output_dir = Some(String::new());
    match toml::Value::try_from(&c) {
        Ok(toml::Value::Table(t)) => t.keys().cloned().collect(),
        _ => unreachable!("the config serializes to a table"),
    }
}

fn parse_override(s: &str) -> Result<(String, toml::Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{s}` is not of the form key=value")))?;
    let (k, v) = (k.trim(), v.trim());
    let value = toml::from_str::<toml::Table>(&format!("v = {v}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

impl ExperimentConfig {
    /// Merge a TOML document and `key=value` overrides over the defaults.
    pub fn resolve(text: Option<&str>, overrides: &[String]) -> Result<Self> {
        let mut table = match text {
            Some(t) => toml::from_str::<toml::Table>(t).map_err(|e| CliError::Config(e.to_string()))?,
            None => toml::Table::new(),
        };
        for o in overrides {
            let (k, v) = parse_override(o)?;
            table.insert(k, v);
        }
        let known = known_keys();
        let unknown: Vec<String> = table.keys().filter(|k| !known.contains(k)).cloned().collect();
        if !unknown.is_empty() {
            return Err(CliError::UnknownKeys(unknown));
        }
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => Some(std::fs::read_to_string(p).map_err(|e| CliError::Path {
                path: p.display().to_string(),
                source: e,
            })?),
            None => None,
        };
        Self::resolve(text.as_deref(), overrides)
    }

    /// The resolved configuration without the output location.
    pub fn resolved_toml(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        toml::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.resolved_toml().as_bytes()))
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return PathBuf::from(p);
        }
        std::env::var_os(OUTPUT_DIR_VAR).map_or_else(|| PathBuf::from("ndrop-out"), PathBuf::from)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec> {
        let k = match self.kernel.as_str() {
            "fractional" => KernelSpec::fractional(self.dimension, self.s, self.epsilon)?,
            "truncated" => KernelSpec::truncated(self.dimension, self.s, self.epsilon, self.kernel_cap)?,
            "tabulated" => {
                let path = self
                    .kernel_table
                    .as_deref()
                    .ok_or_else(|| CliError::Config("kernel = \"tabulated\" needs kernel_table".into()))?;
                let table = RadialTable::from_csv(open(path)?, path)?;
                KernelSpec::tabulated(self.dimension, self.s, self.epsilon, table, self.kernel_tail)?
            }
            other => return Err(CliError::Config(format!("unknown kernel `{other}`"))),
        };
        Ok(k.with_lambda(self.lambda)?.with_amplitude(self.amplitude)?)
    }

    pub fn energy_params(&self) -> Result<EnergyParams> {
        Ok(EnergyParams::new(self.kernel_spec()?, self.a)?
            .with_alpha(self.alpha)?
            .with_beta(self.beta)?)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let q = QuadratureSpec {
            method: self.method,
            budget: self.budget,
            seed: self.seed,
            exact_ball_paths: self.exact_ball_paths,
            ..QuadratureSpec::default()
        };
        q.validate()?;
        Ok(q)
    }

    pub fn shape(&self) -> Result<Shape> {
        let n = self.dimension;
        match self.shape.as_str() {
            "empty" => Ok(Shape::empty(n)),
            "ball" => {
                let b = Shape::Balls(ball_of_volume(n, self.mass)?);
                if self.center.is_empty() {
                    Ok(b)
                } else {
                    Ok(b.translate(&self.center)?)
                }
            }
            "file" => {
                let path = self
                    .shape_file
                    .as_deref()
                    .ok_or_else(|| CliError::Config("shape = \"file\" needs shape_file".into()))?;
                let shape = if path.ends_with(".csv") {
                    Shape::Balls(io::read_balls(open(path)?, path)?)
                } else {
                    Shape::Voxels(io::read_voxels(BufReader::new(open(path)?), path)?)
                };
                if shape.dimension() != n {
                    return Err(CliError::Config(format!(
                        "{path} holds a {}-dimensional shape but dimension = {n}",
                        shape.dimension()
                    )));
                }
                Ok(shape)
            }
            other => Err(CliError::Config(format!("unknown shape `{other}`"))),
        }
    }

    pub fn offset_grid(&self) -> OffsetGrid {
        if self.offsets.is_empty() {
            OffsetGrid::Span {
                points: self.offset_points,
                padding: self.offset_padding,
            }
        } else {
            OffsetGrid::Explicit(self.offsets.clone())
        }
    }

    pub fn family_grid(&self) -> FamilyGrid {
        FamilyGrid {
            fractions: self.fractions.clone(),
            separations: SeparationGrid::LogSpan {
                points: self.separation_points,
                gap: self.separation_gap,
                far: self.separation_far,
                infinite: self.include_infinite,
            },
        }
    }

    pub fn anneal_options(&self) -> AnnealOptions {
        AnnealOptions {
            steps: self.anneal_steps,
            initial_temperature: self.anneal_temperature,
            ratio: self.anneal_ratio,
            epoch: self.anneal_epoch,
            seed: self.seed,
        }
    }
}

fn open(path: &str) -> Result<File> {
    File::open(path).map_err(|e| CliError::Path {
        path: path.to_string(),
        source: e,
    })
}
