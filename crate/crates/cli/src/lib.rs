//! The `roadmarkov` command-line tool.
//!
//! Each subcommand wraps one stage of the pipeline and writes plain files
//! (graph text, corpus, kernel, CSV, JSON) into an output location, so the
//! stages can be chained or inspected independently:
//!
//! ```text
//! build-graph → match → estimate → simulate
//!                  ↘ stats
//! ```
//!
//! `toy` checks the whole chain on the five-vertex reference example and
//! `benchmark` compares the ML and WLS estimators on simulated corpora.
//! Exit codes are 0 on success, 1 on solver or internal failure and 2 on
//! invalid input.

pub mod commands;
pub mod config;
mod error;
pub mod toy_checks;

pub use error::CliError;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "roadmarkov", version, about = "Markov traffic on road networks")]
pub struct Cli {
    /// Machine-readable output on stdout and JSON errors on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    /// Flat `key = value` file of default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a road graph from OSM XML or re-export a graph file.
    #[command(args_override_self = true)]
    BuildGraph(commands::build_graph::BuildGraphArgs),
    /// Snap GPS trajectories to graph vertices and write a corpus.
    #[command(args_override_self = true)]
    Match(commands::matching::MatchArgs),
    /// Estimate the kernel and two-dimensional stationary law from a corpus.
    #[command(args_override_self = true)]
    Estimate(commands::estimate::EstimateArgs),
    /// Run independent walkers and track the chi-squared distance to π.
    #[command(args_override_self = true)]
    Simulate(commands::simulate::SimulateArgs),
    /// Compare ML and WLS bias on simulated corpora.
    #[command(args_override_self = true)]
    Benchmark(commands::benchmark::BenchmarkArgs),
    /// Recompute the five-vertex reference example and check every value.
    #[command(args_override_self = true)]
    Toy(commands::toy::ToyArgs),
    /// Descriptive statistics of a corpus.
    #[command(args_override_self = true)]
    Stats(commands::stats::StatsArgs),
}

/// What a command produced. `failure` is set when output was written but the
/// run must still exit non-zero (failed self-checks).
#[derive(Debug)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub text: String,
    pub failure: Option<CliError>,
}

impl Outcome {
    pub fn ok(summary: serde_json::Value, text: String) -> Self {
        Self { summary, text, failure: None }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::BuildGraph(a) => commands::build_graph::run(a),
        Command::Match(a) => commands::matching::run(a),
        Command::Estimate(a) => commands::estimate::run(a),
        Command::Simulate(a) => commands::simulate::run(a),
        Command::Benchmark(a) => commands::benchmark::run(a),
        Command::Toy(a) => commands::toy::run(a),
        Command::Stats(a) => commands::stats::run(a),
    }
}

fn report_error(e: &CliError, json: bool) -> i32 {
    if json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("error: {e}");
    }
    e.exit_code()
}

/// Parses `args` (including the program name), runs, prints, and returns the
/// process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let json = args.iter().skip(1).any(|a| a == "--json");
    let cli = match config::expand_args(args).map(Cli::try_parse_from) {
        Err(e) => return report_error(&e, json),
        Ok(Err(e)) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            if json {
                return report_error(&CliError::Usage(e.render().to_string().trim_end().to_string()), true);
            }
            let _ = e.print();
            return 2;
        }
        Ok(Ok(cli)) => cli,
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.summary).expect("serialisable summary"));
            } else {
                print!("{}", out.text);
            }
            out.failure.map_or(0, |e| report_error(&e, cli.json))
        }
        Err(e) => report_error(&e, cli.json),
    }
}
