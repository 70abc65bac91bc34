//! `geneqa latency`: per-task latency comparison between two runs with
//! Welch and Mann-Whitney significance.

use std::path::{Path, PathBuf};

use clap::Args;

use geneqa_core::bench::{
    compare_latency, render_latency_markdown, write_latency_report, LatencySample,
};
use geneqa_core::pipeline::QaResult;

use crate::commands::{read_episodes, run_label};
use crate::CliError;

#[derive(Args)]
pub struct LatencyArgs {
    /// Baseline run directory (A)
    pub run_a: PathBuf,
    /// Comparison run directory (B)
    pub run_b: PathBuf,
    /// Also write latency.json and latency.md into this directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

fn to_samples(results: &[QaResult], run_dir: &Path) -> Result<Vec<LatencySample>, CliError> {
    results
        .iter()
        .map(|r| {
            let task = r.task.ok_or_else(|| {
                CliError::config(format!(
                    "episode {} in {} has no task label; latency comparison needs benchmark runs",
                    r.episode_id,
                    run_dir.display()
                ))
            })?;
            Ok(LatencySample {
                task,
                item_id: r.episode_id.clone(),
                latency_ms: r.latency_ms,
            })
        })
        .collect()
}

pub fn run(args: LatencyArgs) -> Result<(), CliError> {
    let results_a = read_episodes(&args.run_a)?;
    let results_b = read_episodes(&args.run_b)?;
    let samples_a = to_samples(&results_a, &args.run_a)?;
    let samples_b = to_samples(&results_b, &args.run_b)?;

    let comparison = compare_latency(&samples_a, &samples_b)
        .map_err(|e| CliError::config(e.to_string()))?;

    let label_a = run_label(&args.run_a);
    let label_b = run_label(&args.run_b);
    print!("{}", render_latency_markdown(&comparison, &label_a, &label_b));

    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)
            .map_err(|e| CliError::config(format!("creating {}: {e}", out.display())))?;
        write_latency_report(out, &comparison, &label_a, &label_b)
            .map_err(|e| CliError::config(e.to_string()))?;
        println!();
        println!("latency report written to {}", out.display());
    }
    Ok(())
}
