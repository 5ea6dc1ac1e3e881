//! `hwkg`: runs presets and configuration files, the oracle suites and report merging.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hwkg::experiment::{
    calibration_criteria, configure_threads, merge_reports, parse_config, preset, preset_names,
    run_experiment, Criterion, ExperimentPreset, Overrides, PresetKind,
};
use hwkg::oracle::CalibrationSetup;
use hwkg::Error;

#[derive(Parser)]
#[command(
    name = "hwkg",
    version,
    about = "Wave / Klein-Gordon hyperboloidal diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunFlags {
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "tfinal")]
    t_final: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Nodes per axis
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Seed of the random-smooth profile
    #[arg(long)]
    seed: Option<u64>,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            t_final: self.t_final,
            epsilon: self.epsilon,
            n: self.grid_n,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run a named preset (`hwkg preset list` prints the names)
    Preset {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Check the exact-derivative identities at random in-cone points
    Identities {
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Observed convergence orders of the discrete operators
    Convergence {
        #[arg(long, default_value_t = 25)]
        n: usize,
    },
    /// Merge the diagnostics CSVs of several run directories
    ReportMerge {
        /// Merged CSV
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        runs: Vec<PathBuf>,
    },
}

fn print_criteria(criteria: &[Criterion]) -> ExitCode {
    for c in criteria {
        println!("{c}");
    }
    if criteria.iter().all(|c| c.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn execute(mut p: ExperimentPreset, flags: &RunFlags, default_out: &str) -> Result<ExitCode> {
    flags.overrides().apply(&mut p.config);
    let threads = configure_threads()?;
    let out = flags
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(default_out));
    eprintln!(
        "{}: n = {}, threads = {threads}, output in {}",
        p.name,
        p.config.n,
        out.display()
    );
    let res = run_experiment(&p, &out, &mut |line| eprintln!("{line}"))?;
    let s = &res.summary;
    for c in &s.criteria {
        println!("{c}");
    }
    if let Some(reason) = &s.reason {
        println!("aborted: {reason}");
    }
    println!(
        "status={} pass={} wall={:.1}s",
        s.status, s.pass, s.wall_time_s
    );
    Ok(ExitCode::from(s.exit_code() as u8))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, flags } => {
            let config = parse_config(&config)?;
            let p = ExperimentPreset {
                name: "run".into(),
                config,
                checks: vec![
                    hwkg::experiment::Check::Margins,
                    hwkg::experiment::Check::Support,
                ],
                kind: PresetKind::Single,
            };
            execute(p, &flags, "run")
        }
        Command::Preset { name, flags } => {
            if name == "list" {
                for n in preset_names() {
                    println!("{n}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            let p = match preset(&name) {
                Err(Error::UnknownPreset(n)) => {
                    bail!(
                        "unknown preset '{n}'; known presets: {}",
                        preset_names().join(", ")
                    )
                }
                other => other?,
            };
            execute(p, &flags, &name)
        }
        Command::Identities { points, seed } => {
            let criteria = hwkg::experiment::identity_criteria(points, seed)?;
            Ok(print_criteria(&criteria))
        }
        Command::Convergence { n } => {
            let setup = CalibrationSetup {
                n_coarse: n,
                ..CalibrationSetup::default()
            };
            Ok(print_criteria(&calibration_criteria(&setup)?))
        }
        Command::ReportMerge { out, runs } => {
            let dirs: Vec<&Path> = runs.iter().map(PathBuf::as_path).collect();
            let merged = merge_reports(&dirs)?;
            std::fs::write(&out, merged).with_context(|| format!("writing {}", out.display()))?;
            println!("merged {} runs into {}", runs.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
