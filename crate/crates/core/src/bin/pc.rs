//! `pc`: run potential-center experiments from a JSON config.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.
//! `PC_THREADS` limits the worker pool (set 1 for serial runs).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use potential_centers::config::ExperimentConfig;
use potential_centers::run::{run, RunError};

#[derive(Parser)]
#[command(name = "pc", version, about = "Potentials of bodies: centers, unfolded regions, cone bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON/SVG artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write an SVG figure (2-D experiments).
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one potential at one point.
    Eval(Common),
    /// Center (maximizer set) experiments.
    Centers {
        #[command(subcommand)]
        sub: CentersCommand,
    },
    /// Minimal unfolded region by directional folding.
    Unfolded(Common),
    /// Cone-comparison function E(R) and its zero.
    Conebound(Common),
    /// Kernel summability report.
    Summability(Common),
}

#[derive(Subcommand)]
enum CentersCommand {
    /// Locate the maximizer plateau.
    Find(Common),
    /// Small-parameter convergence to the renormalized centers.
    Converge(Common),
    /// Containment in the unfolded region and inner-parallel body.
    Contain(Common),
    /// Midpoint-concavity probe on seeded pairs.
    Concavity(Common),
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PC_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
            _ => {
                eprintln!("validation error: PC_THREADS must be a positive integer, got {threads:?}");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::Eval(c) => ("eval", c),
        Command::Centers { sub } => match sub {
            CentersCommand::Find(c) => ("centers.find", c),
            CentersCommand::Converge(c) => ("centers.converge", c),
            CentersCommand::Contain(c) => ("centers.contain", c),
            CentersCommand::Concavity(c) => ("centers.concavity", c),
        },
        Command::Unfolded(c) => ("unfolded", c),
        Command::Conebound(c) => ("conebound", c),
        Command::Summability(c) => ("summability", c),
    };

    let text = match std::fs::read_to_string(&common.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("validation error: config {}: {e}", common.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("validation error: {e}");
            return ExitCode::from(2);
        }
    };

    match run(&cfg, experiment, &common.out, common.svg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RunError::Validation(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Numerical(_)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
