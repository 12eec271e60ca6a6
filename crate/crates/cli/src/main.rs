//! `navstack`: run scenarios, slice scans into maps, and compare estimators.

mod commands;
mod manifest;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use navstack::scan::SliceBand;
use navstack::sim::{Outcome, ScenarioFile};

use commands::{cmd_compare, cmd_map, cmd_run, cmd_validate, resolve_out, LoadedScenario, Overrides, DEFAULT_OUT};
use manifest::{CommandName, MapArgs, RunManifest};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_TIME_LIMIT: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "navstack",
    version,
    about = "Differential-drive navigation simulator and mapping tools"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario; exits 0 at the goal and 2 at the time limit.
    Run {
        scenario: PathBuf,
        /// Output directory (overrides NAVSTACK_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated time limit in seconds.
        #[arg(long)]
        t_max: Option<f64>,
        /// Control period in seconds.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Reduce a 3D scan to a 2D obstacle map.
    Map {
        /// Built-in synthetic scene: table, gate or empty.
        #[arg(long, conflicts_with = "cloud", required_unless_present = "cloud")]
        scene: Option<String>,
        /// Point-cloud file: `x y z` per line, frames separated by blank lines.
        #[arg(long)]
        cloud: Option<PathBuf>,
        /// Slice band bounds in meters.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        band: Option<Vec<f64>>,
        /// Raster cell size in meters.
        #[arg(long, default_value_t = 0.05)]
        cell: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo comparison of odometry-only and EKF configurations.
    Compare {
        scenario: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n_runs: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check scenario files against the schema and value constraints.
    Validate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Print the JSON Schema of scenario files.
    Schema,
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_for(outcome: Outcome) -> u8 {
    match outcome {
        Outcome::GoalReached => EXIT_OK,
        Outcome::TimeLimit => EXIT_TIME_LIMIT,
    }
}

fn default_out() -> PathBuf {
    PathBuf::from(DEFAULT_OUT)
}

fn band_from(v: Option<Vec<f64>>) -> SliceBand {
    match v.as_deref() {
        Some([lo, hi]) => SliceBand { z_min: *lo, z_max: *hi },
        _ => SliceBand::default(),
    }
}

fn replay(path: &Path, out: Option<&Path>) -> Result<u8> {
    let m = RunManifest::load(path)?;
    if m.tool_version != manifest::TOOL_VERSION {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            m.tool_version,
            manifest::TOOL_VERSION
        );
    }
    let dir = resolve_out(out, &m.out_dir);
    let origin = format!("{} (scenario)", path.display());
    let scenario = |s: &Option<ScenarioFile>| LoadedScenario::from_file(s.clone().expect("checked on load"), &origin);
    match m.command {
        CommandName::Run => Ok(exit_for(cmd_run(&scenario(&m.scenario), Overrides::default(), &dir)?)),
        CommandName::Compare => cmd_compare(&scenario(&m.scenario), m.n_runs.expect("checked on load"), &dir).map(|_| EXIT_OK),
        CommandName::Map => cmd_map(m.map.as_ref().expect("checked on load"), &dir).map(|_| EXIT_OK),
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            t_max,
            dt,
        } => {
            let s = LoadedScenario::read(&scenario)?;
            let dir = resolve_out(out.as_deref(), &default_out());
            let outcome = cmd_run(&s, Overrides { seed, t_max, dt }, &dir)?;
            if outcome == Outcome::TimeLimit {
                eprintln!("time limit reached before the goal; outputs in {}", dir.display());
            }
            Ok(exit_for(outcome))
        }
        Command::Map {
            scene,
            cloud,
            band,
            cell,
            out,
        } => {
            let args = MapArgs {
                scene,
                cloud,
                band: band_from(band),
                cell,
            };
            cmd_map(&args, &resolve_out(out.as_deref(), &default_out()))?;
            Ok(EXIT_OK)
        }
        Command::Compare { scenario, n_runs, out } => {
            let s = LoadedScenario::read(&scenario)?;
            cmd_compare(&s, n_runs as usize, &resolve_out(out.as_deref(), &default_out()))?;
            Ok(EXIT_OK)
        }
        Command::Validate { scenarios } => {
            cmd_validate(&scenarios)?;
            Ok(EXIT_OK)
        }
        Command::Schema => {
            print!("{}", ScenarioFile::json_schema());
            Ok(EXIT_OK)
        }
        Command::Replay { manifest, out } => replay(&manifest, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage errors are ordinary errors here; exit code 2 means the time limit
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
