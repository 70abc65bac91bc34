//! `geneqa bench` and `geneqa record`: run a suite, write the run
//! directory, and score what came back. `record` is the same run with the
//! transport forced to record fixtures.

use std::path::PathBuf;

use clap::Args;

use geneqa_core::bench::{aggregate, render_scores_markdown, write_score_report, ScoreReport};
use geneqa_core::pipeline::{run_batch, EpisodeInput};
use geneqa_core::transport::TransportMode;

use crate::commands::{load_suites, parse_suites, score_all};
use crate::manifest::{apply_mode, apply_profile, Manifest};
use crate::CliError;

#[derive(Args)]
pub struct BenchArgs {
    /// Manifest file (TOML)
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Which suite to run: geneturing, genehop or all
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Pipeline mode override: monolithic or multiagent
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Keep only the first N items of every task
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
    /// Prompt profile override
    #[arg(long, value_name = "NAME")]
    pub profile: Option<String>,
    /// Run directory name (default: derived from the start time)
    #[arg(long, value_name = "ID")]
    pub run_id: Option<String>,
    /// Worker thread override
    #[arg(long, value_name = "N")]
    pub workers: Option<usize>,
}

pub fn run(args: BenchArgs, record: bool) -> Result<(), CliError> {
    let mut manifest = Manifest::load(&args.manifest)?;
    if record {
        if manifest.transport.fixture_dir.is_none() {
            return Err(CliError::config(
                "recording needs a transport.fixture_dir in the manifest",
            ));
        }
        manifest.transport.mode = TransportMode::Record;
    }
    apply_mode(&mut manifest.pipeline, args.mode.as_deref())?;
    apply_profile(&mut manifest.pipeline, args.profile.as_deref())?;
    if let Some(workers) = args.workers {
        manifest.workers = workers;
    }
    manifest.pipeline.validate().map_err(|e| CliError::config(e.to_string()))?;

    let suites = parse_suites(&args.suite)?;
    let dataset_dir = manifest.dataset.clone().ok_or_else(|| {
        CliError::config("manifest needs a dataset directory to run a benchmark")
    })?;
    let datasets = load_suites(&dataset_dir, &suites, args.limit)?;
    for dataset in &datasets {
        for warning in &dataset.warnings {
            eprintln!("warning: {warning}");
        }
    }

    let inputs: Vec<EpisodeInput> = datasets
        .iter()
        .flat_map(|d| d.items.iter())
        .map(|item| EpisodeInput {
            id: item.item_id.clone(),
            question: item.question.clone(),
            task: Some(item.task),
        })
        .collect();
    if inputs.is_empty() {
        return Err(CliError::config("the selected suite has no items"));
    }

    let clock = manifest.pick_clock();
    let run_manifest = manifest.to_run_manifest(args.run_id)?;
    let output = run_batch(&run_manifest, &inputs, clock)
        .map_err(|e| CliError::config(e.to_string()))?;

    let species = manifest.species_map()?;
    let mut warnings: Vec<String> =
        datasets.iter().flat_map(|d| d.warnings.iter().cloned()).collect();
    let scored = score_all(&output.results, &datasets, &species, None, &mut warnings)?;
    let report = ScoreReport { tasks: aggregate(&scored), warnings };
    write_score_report(&output.run_dir, &report).map_err(|e| CliError::config(e.to_string()))?;

    let failures = output
        .results
        .iter()
        .filter(|r| {
            matches!(r.outcome, geneqa_core::pipeline::EpisodeOutcome::Failure { .. })
        })
        .count();
    print!("{}", render_scores_markdown(&report));
    println!();
    println!("episodes: {} ({} failed)", output.results.len(), failures);
    println!("run directory: {}", output.run_dir.display());
    Ok(())
}
