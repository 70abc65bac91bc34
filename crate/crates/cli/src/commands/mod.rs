//! One module per subcommand plus the helpers they share.

pub mod annotate;
pub mod ask;
pub mod bench;
pub mod latency;
pub mod replay;
pub mod report;
pub mod score;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use geneqa_core::bench::{
    load_dataset, score_results, JudgeClient, LoadedDataset, ScoredItem, SpeciesMap,
};
use geneqa_core::domain::Suite;
use geneqa_core::pipeline::{safe_file_stem, QaResult};

use crate::CliError;

/// Reads every episode result of a run.
pub fn read_episodes(run_dir: &Path) -> Result<Vec<QaResult>, CliError> {
    let path = run_dir.join("episodes.jsonl");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
    let mut results = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let result: QaResult = serde_json::from_str(line).map_err(|e| {
            CliError::config(format!("{} line {}: {e}", path.display(), idx + 1))
        })?;
        results.push(result);
    }
    if results.is_empty() {
        return Err(CliError::config(format!("{} holds no episodes", path.display())));
    }
    Ok(results)
}

/// The run's recorded metadata, when present.
pub fn read_run_meta(run_dir: &Path) -> Option<serde_json::Value> {
    let text = std::fs::read_to_string(run_dir.join("run_meta.json")).ok()?;
    serde_json::from_str(&text).ok()
}

/// Label for a run in reports: its recorded id, falling back to the
/// directory name.
pub fn run_label(run_dir: &Path) -> String {
    read_run_meta(run_dir)
        .and_then(|meta| meta.get("run_id").and_then(|v| v.as_str()).map(String::from))
        .unwrap_or_else(|| {
            run_dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| run_dir.display().to_string())
        })
}

pub fn trace_path(run_dir: &Path, episode_id: &str) -> PathBuf {
    run_dir.join("traces").join(format!("{}.jsonl", safe_file_stem(episode_id)))
}

/// Parses a `--suite` value into the suites to load.
pub fn parse_suites(raw: &str) -> Result<Vec<Suite>, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "geneturing" => Ok(vec![Suite::GeneTuring]),
        "genehop" => Ok(vec![Suite::GeneHop]),
        "all" => Ok(vec![Suite::GeneTuring, Suite::GeneHop]),
        other => Err(CliError::config(format!(
            "unknown suite {other:?}, expected geneturing, genehop or all"
        ))),
    }
}

/// Loads the requested suites from one dataset directory, applying the
/// per-task limit.
pub fn load_suites(
    dir: &Path,
    suites: &[Suite],
    limit: Option<usize>,
) -> Result<Vec<LoadedDataset>, CliError> {
    let mut datasets = Vec::new();
    for suite in suites {
        let mut dataset = load_dataset(dir, *suite)
            .map_err(|e| CliError::config(format!("dataset {}: {e}", dir.display())))?;
        if let Some(limit) = limit {
            dataset.limit_per_task(limit);
        }
        datasets.push(dataset);
    }
    Ok(datasets)
}

/// Scores a run against one or more suites. Each dataset only sees the
/// episodes that belong to it, so mixed-suite runs score cleanly.
pub fn score_all(
    results: &[QaResult],
    datasets: &[LoadedDataset],
    species: &SpeciesMap,
    judge: Option<&JudgeClient>,
    warnings: &mut Vec<String>,
) -> Result<Vec<ScoredItem>, CliError> {
    let mut scored = Vec::new();
    for dataset in datasets {
        let ids: BTreeSet<&str> = dataset.items.iter().map(|i| i.item_id.as_str()).collect();
        let subset: Vec<QaResult> = results
            .iter()
            .filter(|r| ids.contains(r.episode_id.as_str()))
            .cloned()
            .collect();
        scored.extend(
            score_results(&subset, dataset, species, judge, warnings)
                .map_err(|e| CliError::config(e.to_string()))?,
        );
    }
    Ok(scored)
}
