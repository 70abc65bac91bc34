//! `geneqa score`: re-grade an existing run, optionally with the judge
//! model for free-text answers.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Args;

use geneqa_core::agents::PromptLibrary;
use geneqa_core::bench::{
    aggregate, render_scores_markdown, write_score_report, JudgeClient, ScoreReport,
};
use geneqa_core::domain::Suite;

use crate::commands::{load_suites, read_episodes, read_run_meta, score_all};
use crate::manifest::Manifest;
use crate::CliError;

#[derive(Args)]
pub struct ScoreArgs {
    /// Run directory holding episodes.jsonl
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Grade free-text answers with the judge backend
    #[arg(long)]
    pub judge: bool,
    /// Manifest supplying the judge backend, species table or an
    /// alternative dataset location
    #[arg(long, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
}

pub fn run(args: ScoreArgs) -> Result<(), CliError> {
    let results = read_episodes(&args.run)?;
    let meta = read_run_meta(&args.run);
    let manifest = args.manifest.as_deref().map(Manifest::load).transpose()?;

    let meta_path = |key: &str| -> Option<PathBuf> {
        meta.as_ref()?
            .get("manifest")?
            .get(key)?
            .as_str()
            .map(PathBuf::from)
    };

    let dataset_dir = manifest
        .as_ref()
        .and_then(|m| m.dataset.clone())
        .or_else(|| meta_path("dataset"))
        .ok_or_else(|| {
            CliError::config(
                "no dataset recorded for this run; pass --manifest with a dataset entry",
            )
        })?;

    // Load only the suites the run actually contains.
    let suites: BTreeSet<Suite> =
        results.iter().filter_map(|r| r.task).map(|t| t.suite()).collect();
    if suites.is_empty() {
        return Err(CliError::config(
            "run episodes carry no task labels, so there is nothing to score",
        ));
    }
    let suites: Vec<Suite> = suites.into_iter().collect();
    let datasets = load_suites(&dataset_dir, &suites, None)?;

    let species = match &manifest {
        Some(m) => m.species_map()?,
        None => geneqa_core::bench::SpeciesMap::builtin(),
    };

    let judge = if args.judge {
        let section = manifest
            .as_ref()
            .and_then(|m| m.judge.clone())
            .ok_or_else(|| {
                CliError::config(
                    "judge requested but no [judge] backend configured; pass --manifest with one",
                )
            })?;
        let backend = section.backend.build().map_err(|e| CliError::config(e.to_string()))?;
        let prompt_dir = manifest
            .as_ref()
            .map(|m| m.prompt_dir.clone())
            .or_else(|| meta_path("prompt_dir"))
            .ok_or_else(|| CliError::config("no prompt directory for the judge"))?;
        let prompts = PromptLibrary::load(&prompt_dir)
            .map_err(|e| CliError::config(e.to_string()))?;
        Some(JudgeClient::new(backend, prompts))
    } else {
        None
    };

    let mut warnings: Vec<String> =
        datasets.iter().flat_map(|d| d.warnings.iter().cloned()).collect();
    let scored = score_all(&results, &datasets, &species, judge.as_ref(), &mut warnings)?;
    let report = ScoreReport { tasks: aggregate(&scored), warnings };
    write_score_report(&args.run, &report).map_err(|e| CliError::config(e.to_string()))?;

    print!("{}", render_scores_markdown(&report));
    println!();
    println!("scores written to {}", args.run.join("scores.json").display());
    Ok(())
}
