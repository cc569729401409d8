//! `engage-bench`: reproducible engagement-analytics pipelines.
//!
//! Exit codes: 0 success, 1 data or tolerance failure, 2 usage or configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use engage_core::stats::ReportFormat;
use engage_core::TrialCondition;

pub const DEFAULT_SEED: u64 = 0;
pub const SEED_ENV: &str = "ENGAGE_BENCH_SEED";

#[derive(Parser)]
#[command(name = "engage-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
pub struct SeedArg {
    /// Random seed; overrides ENGAGE_BENCH_SEED
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort of session logs plus a manifest
    Simulate {
        /// trial1 | trial2 | trial3 | memory (or a full condition name)
        #[arg(long)]
        condition: TrialCondition,
        #[arg(long, default_value_t = 15)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
        /// Also write each session's message transcript under `transcripts/`
        #[arg(long)]
        transcripts: bool,
    },
    /// Score every session log in a directory
    Analyze {
        #[arg(long)]
        input: PathBuf,
        /// Weight config (JSON); defaults to uniform weights with cohort-range time bounds
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value = "json", value_parser = parse_format)]
        format: ReportFormat,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analyzed cohorts and emit a report
    Compare {
        /// Vector tables written by `analyze --format json`
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        /// Directory for report.json and report.csv; JSON to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every trial end to end and check the reproduced aggregates
    Reproduce {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 15)]
        n: usize,
        /// Weight config used for scoring (JSON)
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Also check the significance pattern over this many consecutive seeds
        #[arg(long)]
        sweep: Option<u64>,
        /// Directory for the reproduced comparison report
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: engage_core::stats::StatsError| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Simulate {
            condition,
            n,
            seed,
            out,
            transcripts,
        } => commands::simulate(condition, n, seed.seed, &out, transcripts),
        Command::Analyze {
            input,
            weights,
            format,
            out,
        } => commands::analyze(&input, weights.as_deref(), format, out.as_deref()),
        Command::Compare { inputs, out } => commands::compare(&inputs, out.as_deref()),
        Command::Reproduce {
            seed,
            n,
            weights,
            sweep,
            out,
        } => commands::reproduce(seed.seed, n, weights.as_deref(), sweep, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("engage-bench: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
