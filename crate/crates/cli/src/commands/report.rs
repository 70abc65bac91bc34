//! `geneqa report`: rebuild the error report from the (possibly
//! annotated) trace files and print a run summary.

use std::path::PathBuf;

use clap::Args;

use geneqa_core::bench::{error_counts, render_errors_markdown, write_error_report};
use geneqa_core::pipeline::EpisodeOutcome;
use geneqa_core::trace::EpisodeTrace;

use crate::commands::{read_episodes, read_run_meta, trace_path};
use crate::CliError;

#[derive(Args)]
pub struct ReportArgs {
    /// Run directory
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
}

pub fn run(args: ReportArgs) -> Result<(), CliError> {
    let mut results = read_episodes(&args.run)?;

    // Annotations land in the trace files after the run, so refresh each
    // episode's trace from disk before counting.
    for result in &mut results {
        let path = trace_path(&args.run, &result.episode_id);
        if let Ok(trace) = EpisodeTrace::read_from(&path) {
            result.trace = trace;
        }
    }

    let counts = error_counts(&results);
    write_error_report(&args.run, &counts).map_err(|e| CliError::config(e.to_string()))?;

    let answers = results
        .iter()
        .filter(|r| matches!(r.outcome, EpisodeOutcome::Answer { .. }))
        .count();
    let rejections = results
        .iter()
        .filter(|r| matches!(r.outcome, EpisodeOutcome::Rejected { .. }))
        .count();
    let failures = results
        .iter()
        .filter(|r| matches!(r.outcome, EpisodeOutcome::Failure { .. }))
        .count();
    let llm_calls: u64 = results.iter().map(|r| u64::from(r.llm_calls)).sum();
    let http_calls: u64 = results.iter().map(|r| u64::from(r.http_calls)).sum();
    let mean_latency =
        results.iter().map(|r| r.latency_ms as f64).sum::<f64>() / results.len() as f64;
    let annotated = results.iter().filter(|r| !r.trace.annotations().is_empty()).count();

    println!("# Run summary");
    println!();
    if let Some(run_id) = read_run_meta(&args.run)
        .and_then(|m| m.get("run_id").and_then(|v| v.as_str()).map(String::from))
    {
        println!("run: {run_id}");
    }
    println!(
        "episodes: {} (answers {}, rejections {}, failures {})",
        results.len(),
        answers,
        rejections,
        failures
    );
    println!("llm calls: {llm_calls}, http calls: {http_calls}");
    println!("mean latency: {mean_latency:.0} ms");
    println!("annotated episodes: {annotated}");
    println!();
    print!("{}", render_errors_markdown(&counts));
    println!();
    println!("error report written to {}", args.run.join("errors.json").display());
    Ok(())
}
