//! `locust-radar`: simulate, detect, track, cross-check and report.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input or config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigArgs, PathsConfig};

#[derive(Debug, Parser)]
#[command(name = "locust-radar", version, about = "Locust-swarm detection and tracking in weather radar volumes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a simulated scene as SVOL volumes plus truth.json and scene.json.
    Simulate {
        /// Scene spec JSON.
        #[arg(conflicts_with = "preset", required_unless_present = "preset")]
        scene: Option<PathBuf>,
        /// Bundled scene name instead of a spec file.
        #[arg(long)]
        preset: Option<String>,
        /// Replaces the scene's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Per-volume cluster CSV and GeoJSON.
    Detect {
        /// SVOL files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Detect and associate a volume sequence into tracks, with alerts.
    Track {
        /// SVOL files or directories of them, in any order.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Rain-gauge and wind corroboration of tracks.geojson.
    Crosscheck {
        tracks: PathBuf,
        /// Rain-gauge CSV; may repeat.
        #[arg(long)]
        rain: Vec<PathBuf>,
        /// Wind grid file; may repeat.
        #[arg(long)]
        wind: Vec<PathBuf>,
        /// Site JSON, when the tracks file does not carry one.
        #[arg(long)]
        site: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Bundle a run directory into report.json and vcp_curves.csv.
    Report {
        run_dir: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

pub trait ResultExt<T> {
    fn input(self) -> Result<T, Failure>;
    fn internal(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Input(e.into()))
    }

    fn internal(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Internal(e.into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { scene, preset, seed, out_dir } => {
            commands::simulate(scene.as_deref(), preset.as_deref(), seed, &PathsConfig { out_dir })
        }
        Command::Detect { inputs, cfg } => commands::detect(&inputs, &cfg.resolve().input()?),
        Command::Track { inputs, cfg } => commands::track(&inputs, &cfg.resolve().input()?),
        Command::Crosscheck { tracks, rain, wind, site, cfg } => {
            commands::crosscheck(&tracks, &rain, &wind, site.as_deref(), &cfg.resolve().input()?)
        }
        Command::Report { run_dir, out_dir } => commands::report(&run_dir, out_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
