//! Command line interface: ask single questions, run benchmark suites,
//! score and compare runs, and inspect episode traces.

mod commands;
mod manifest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

/// Every command failure carries the exit code it maps to: 1 for
/// configuration and environment problems, 2 for a structured pipeline
/// failure.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError { message: message.into(), code: 1 }
    }

    pub fn pipeline(message: impl Into<String>) -> CliError {
        CliError { message: message.into(), code: 2 }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(
    name = "geneqa",
    version,
    about = "Tool-augmented genomic question answering",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one question and write its episode trace
    Ask(commands::ask::AskArgs),
    /// Run a benchmark suite and score the answers
    Bench(commands::bench::BenchArgs),
    /// Re-score an existing run directory
    Score(commands::score::ScoreArgs),
    /// Compare the latency of two runs
    Latency(commands::latency::LatencyArgs),
    /// Run a suite against live services while recording fixtures
    Record(commands::bench::BenchArgs),
    /// Validate a trace file and print its events
    Replay(commands::replay::ReplayArgs),
    /// Attach an error category to an episode trace
    Annotate(commands::annotate::AnnotateArgs),
    /// Rebuild the error report and summary for a run
    Report(commands::report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not errors; anything else is a
            // configuration problem.
            let benign =
                matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = err.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    let result = match cli.command {
        Command::Ask(args) => commands::ask::run(args),
        Command::Bench(args) => commands::bench::run(args, false),
        Command::Score(args) => commands::score::run(args),
        Command::Latency(args) => commands::latency::run(args),
        Command::Record(args) => commands::bench::run(args, true),
        Command::Replay(args) => commands::replay::run(args),
        Command::Annotate(args) => commands::annotate::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
