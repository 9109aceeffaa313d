use clap::{Parser, Subcommand};
use ndrop_cli::commands::{run, Command};
use ndrop_cli::config::ExperimentConfig;
use ndrop_cli::output::Artifacts;
use ndrop_cli::CliError;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for nonlocal liquid-drop energies.
#[derive(Parser)]
#[command(name = "ndrop", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set dimension=2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; beats `output_dir` and `NDROP_OUTPUT_DIR`.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Total energy of the configured shape.
    Energy,
    /// Critical mass from the closed form or the general root.
    CriticalMass,
    /// Splitting defects over directions and offsets, plus the averaged bound.
    SliceScan,
    /// Two-ball search, subadditivity probe or voxel annealing.
    Family,
    /// Identity, isoperimetry, scaling, sphere, layer-cake and golden-value suites.
    Verify,
    /// Audit the kernel conditions.
    KernelCheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Energy => Command::Energy,
            Cmd::CriticalMass => Command::CriticalMass,
            Cmd::SliceScan => Command::SliceScan,
            Cmd::Family => Command::Family,
            Cmd::Verify => Command::Verify,
            Cmd::KernelCheck => Command::KernelCheck,
        }
    }
}

fn execute(cli: &Cli) -> Result<serde_json::Value, (CliError, Option<PathBuf>)> {
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.overrides).map_err(|e| (e, None))?;
    let dir = cfg.output_dir(cli.out.as_deref());
    let mut out = Artifacts::create(&dir, &cfg).map_err(|e| (e, None))?;
    run(cli.command.into(), &cfg, &mut out).map_err(|e| (e, Some(dir)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(v) => {
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string(&v["result"]).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err((e, dir)) => {
            let rec = serde_json::to_string(&e.record()).unwrap_or_default();
            if let Some(d) = dir {
                let _ = std::fs::write(d.join("error.json"), format!("{rec}\n"));
            }
            eprintln!("{rec}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
