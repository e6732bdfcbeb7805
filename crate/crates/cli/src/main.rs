//! `polyhom`: batch front end for the homogenization experiments.
//!
//! Every numeric parameter lives in the JSON config; flags only pick the
//! mode, the config file, the output directory and the seed. Artifacts are
//! buffered and written together with `manifest.json` once the run
//! succeeds, so a failed run leaves no partial output behind.

mod artifacts;
mod config;
mod error;
mod modes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dioph,
    Partition,
    Osc,
    Equi,
    Solve,
    Sweep,
    Corner,
    Report,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Dioph => "dioph",
            Mode::Partition => "partition",
            Mode::Osc => "osc",
            Mode::Equi => "equi",
            Mode::Solve => "solve",
            Mode::Sweep => "sweep",
            Mode::Corner => "corner",
            Mode::Report => "report",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "polyhom", version, about = "Oscillating boundary data on convex polytopes")]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON experiment configuration (`"schema": 1`).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for randomized checks; recorded in every JSON output.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match modes::run(cli.mode, &cli.config, &cli.out, cli.seed) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("polyhom {}: {e}", cli.mode.name());
            ExitCode::from(e.exit_code())
        }
    }
}
