//! `apmm` - seeded saddle-point experiments from the command line.
//!
//! Subcommands: `solve` (single run, CSV trace), `sweep` (one problem,
//! several schedules, combined long-format CSV), `validate-schedule`
//! (coupling and tail checks), `certify` (re-derive diagnostics from a
//! trace file).
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical abort,
//! 4 certificate failure (`validate-schedule` exits 1 when a condition
//! fails, mirroring its report).

mod commands;
mod config;
mod select;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "apmm", version, about = "Alternating proximity mapping solver harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct CommonRunArgs {
    /// Problem selector: `game2x2`, `toy`, `lp[:m=..,n=..,seed=..]`,
    /// `lasso[:m=..,n=..,gamma=..,seed=..]`, `game:<matrix.txt>`, or a
    /// JSON problem file (`file:<path>` or `<path>.json`).
    #[arg(long)]
    problem: Option<String>,

    /// Iteration budget (>= 1).
    #[arg(long)]
    iters: Option<usize>,

    /// Seed for the generated instance and the initial point. Falls back
    /// to the config file, then `APMM_SEED`, then 0.
    #[arg(long)]
    seed: Option<u64>,

    /// JSON config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one schedule on one problem and write the iteration trace.
    Solve {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Schedule selector: `paper`, `theorem`, `cp:<eta>`, or
        /// `file:<table.csv>`.
        #[arg(long)]
        schedule: Option<String>,
        /// Trace output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record the partial primal-dual gap, evaluating over boxes of
        /// this radius around the reference where the sets are unbounded.
        #[arg(long)]
        gap_box_radius: Option<f64>,
        /// Run the weighted-distance certificate after the run.
        #[arg(long)]
        lyapunov: bool,
        /// Skip recording distances to the reference saddle.
        #[arg(long)]
        no_distances: bool,
    },
    /// Run several schedules from one initial point and emit per-schedule
    /// traces plus a combined long-format CSV.
    Sweep {
        #[command(flatten)]
        common: CommonRunArgs,
        /// Comma-separated schedule selectors (at least two).
        #[arg(long)]
        schedule: Option<String>,
        /// Output directory for the trace files.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Check the theorem couplings and step-size tail conditions.
    ValidateSchedule {
        /// Schedule selector.
        #[arg(long)]
        schedule: String,
        /// Operator norm to validate against (alternative to --problem).
        #[arg(long)]
        norm_k: Option<f64>,
        /// Problem whose operator norm to use.
        #[arg(long)]
        problem: Option<String>,
        /// Indices checked: k < horizon.
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        /// Write the full residual report as `#`-metadata + CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Re-derive diagnostics from a trace file against its problem.
    Certify {
        /// Trace CSV produced by `solve`.
        #[arg(long)]
        trace: PathBuf,
        /// Problem selector; must match the trace metadata.
        #[arg(long)]
        problem: Option<String>,
        /// Feasible pairs sampled by the saddle certification.
        #[arg(long)]
        samples: Option<usize>,
        /// Tolerance for the gap and saddle-violation checks.
        #[arg(long)]
        cert_tol: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// Failure modes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Certificate(String),
    /// validate-schedule: conditions failed (exit 1).
    Validation(String),
}

impl Failure {
    fn config(err: impl std::fmt::Display) -> Failure {
        Failure::Config(err.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Certificate(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { common, schedule, out, gap_box_radius, lyapunov, no_distances } => {
            commands::solve(common, schedule, out, gap_box_radius, lyapunov, no_distances)
        }
        Command::Sweep { common, schedule, out_dir } => commands::sweep(common, schedule, out_dir),
        Command::ValidateSchedule { schedule, norm_k, problem, horizon, out, config } => {
            commands::validate_schedule(schedule, norm_k, problem, horizon, out, config)
        }
        Command::Certify { trace, problem, samples, cert_tol, config } => {
            commands::certify(trace, problem, samples, cert_tol, config)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let label = match &failure {
                Failure::Config(m) => format!("configuration error: {m}"),
                Failure::Numerical(m) => format!("numerical abort: {m}"),
                Failure::Certificate(m) => format!("certificate failure: {m}"),
                Failure::Validation(m) => format!("validation failed: {m}"),
            };
            eprintln!("apmm: {label}");
            ExitCode::from(failure.exit_code())
        }
    }
}
