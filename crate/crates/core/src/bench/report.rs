//! Turns finished episodes into graded items, per-task summaries and the
//! written report artifacts: scores, latency comparison and error
//! category counts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bench::dataset::LoadedDataset;
use crate::bench::judge::JudgeClient;
use crate::bench::score::{
    rule_for_task, score_item, Bucket, ScoreError, ScoreRuleKind, SpeciesMap, Verdict,
};
use crate::bench::stats::LatencyComparison;
use crate::domain::{ErrorCode, GoldAnswer, TaskKind};
use crate::pipeline::QaResult;

/// A graded item, or the reason it could not be graded. Unscored items are
/// excluded from accuracy rather than silently counted as wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ItemScore {
    Graded { verdict: Verdict },
    Unscored { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub task: TaskKind,
    pub item_id: String,
    pub score: ItemScore,
    pub latency_ms: u64,
}

/// Per-task accuracy summary. `n` counts graded items only; the three
/// buckets always sum to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: TaskKind,
    pub n: usize,
    pub correct: usize,
    pub half: usize,
    pub error: usize,
    pub unscored: usize,
    pub accuracy: f64,
    pub items: Vec<ScoredItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tasks: Vec<TaskReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
}

/// Grades every episode of a run against the dataset. Episodes are matched
/// to items by id; the judge grades free-text tasks when present,
/// otherwise those items are left unscored with the reason recorded.
pub fn score_results(
    results: &[QaResult],
    dataset: &LoadedDataset,
    species: &SpeciesMap,
    judge: Option<&JudgeClient>,
    warnings: &mut Vec<String>,
) -> Result<Vec<ScoredItem>, ReportError> {
    let by_id: BTreeMap<&str, &crate::domain::BenchmarkItem> =
        dataset.items.iter().map(|item| (item.item_id.as_str(), item)).collect();
    let mut scored = Vec::new();
    for result in results {
        let Some(item) = by_id.get(result.episode_id.as_str()) else {
            warnings.push(format!(
                "episode {} has no dataset item and was skipped",
                result.episode_id
            ));
            continue;
        };
        let score = grade_one(result, item, species, judge, warnings)?;
        scored.push(ScoredItem {
            task: item.task,
            item_id: item.item_id.clone(),
            score,
            latency_ms: result.latency_ms,
        });
    }
    let graded_ids: std::collections::BTreeSet<&str> =
        scored.iter().map(|s| s.item_id.as_str()).collect();
    for item in &dataset.items {
        if !graded_ids.contains(item.item_id.as_str()) {
            warnings.push(format!("item {} has no episode in this run", item.item_id));
        }
    }
    Ok(scored)
}

fn grade_one(
    result: &QaResult,
    item: &crate::domain::BenchmarkItem,
    species: &SpeciesMap,
    judge: Option<&JudgeClient>,
    warnings: &mut Vec<String>,
) -> Result<ItemScore, ReportError> {
    let Some(prediction) = result.outcome.answer_span() else {
        return Ok(ItemScore::Graded {
            verdict: Verdict::from_score(0.0, "no answer"),
        });
    };
    if rule_for_task(item.task).kind == ScoreRuleKind::JudgeSemantic {
        let gold = match &item.gold {
            GoldAnswer::FreeText(text) => text.as_str(),
            other => other_shape_text(other),
        };
        return Ok(match judge {
            None => ItemScore::Unscored { reason: "judge disabled".to_string() },
            Some(judge) => match judge.grade(&item.question, gold, prediction) {
                Ok(verdict) => ItemScore::Graded { verdict },
                Err(err) => {
                    warnings.push(format!("item {}: judge failed: {err}", item.item_id));
                    ItemScore::Unscored { reason: format!("judge failed: {err}") }
                }
            },
        });
    }
    let verdict = score_item(item.task, prediction, &item.gold, species)?;
    Ok(ItemScore::Graded { verdict })
}

fn other_shape_text(gold: &GoldAnswer) -> &str {
    match gold {
        GoldAnswer::SingleString(s) | GoldAnswer::FreeText(s) | GoldAnswer::SpeciesName(s) => s,
        _ => "",
    }
}

/// Per-task summaries in canonical task order. Accuracy is the mean of the
/// graded per-item scores, which for whole- and half-credit rules equals
/// (correct + half/2) / n.
pub fn aggregate(items: &[ScoredItem]) -> Vec<TaskReport> {
    let mut by_task: BTreeMap<TaskKind, Vec<&ScoredItem>> = BTreeMap::new();
    for item in items {
        by_task.entry(item.task).or_default().push(item);
    }
    by_task
        .into_iter()
        .map(|(task, items)| {
            let mut report = TaskReport {
                task,
                n: 0,
                correct: 0,
                half: 0,
                error: 0,
                unscored: 0,
                accuracy: 0.0,
                items: items.iter().map(|&i| i.clone()).collect(),
            };
            let mut total = 0.0;
            for item in items {
                match &item.score {
                    ItemScore::Unscored { .. } => report.unscored += 1,
                    ItemScore::Graded { verdict } => {
                        report.n += 1;
                        total += verdict.score;
                        match verdict.bucket {
                            Bucket::Correct => report.correct += 1,
                            Bucket::Half => report.half += 1,
                            Bucket::Error => report.error += 1,
                        }
                    }
                }
            }
            if report.n > 0 {
                report.accuracy = total / report.n as f64;
            }
            report
        })
        .collect()
}

/// Count of annotated error categories per task, from the episode traces.
pub fn error_counts(results: &[QaResult]) -> BTreeMap<TaskKind, BTreeMap<ErrorCode, usize>> {
    let mut counts: BTreeMap<TaskKind, BTreeMap<ErrorCode, usize>> = BTreeMap::new();
    for result in results {
        let Some(task) = result.task else { continue };
        for category in result.trace.annotations() {
            *counts.entry(task).or_default().entry(category.code).or_insert(0) += 1;
        }
    }
    counts
}

fn write_file(path: &Path, content: &str) -> Result<(), ReportError> {
    std::fs::write(path, content).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes scores.json and scores.md into `dir`.
pub fn write_score_report(dir: &Path, report: &ScoreReport) -> Result<(), ReportError> {
    write_file(&dir.join("scores.json"), &format!("{}\n", serde_json::to_string_pretty(report)?))?;
    write_file(&dir.join("scores.md"), &render_scores_markdown(report))
}

pub fn render_scores_markdown(report: &ScoreReport) -> String {
    let mut out = String::from("# Answer accuracy\n\n");
    out.push_str("| Task | n | Correct | Half | Error | Unscored | Accuracy |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for task in &report.tasks {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {:.2} |\n",
            task.task.display_name(),
            task.n,
            task.correct,
            task.half,
            task.error,
            task.unscored,
            task.accuracy
        ));
    }
    let graded: Vec<&TaskReport> = report.tasks.iter().filter(|t| t.n > 0).collect();
    if graded.len() > 1 {
        let mean = graded.iter().map(|t| t.accuracy).sum::<f64>() / graded.len() as f64;
        out.push_str(&format!("| Mean over tasks | | | | | | {mean:.2} |\n"));
    }
    if !report.warnings.is_empty() {
        out.push_str("\n## Warnings\n\n");
        for warning in &report.warnings {
            out.push_str(&format!("- {warning}\n"));
        }
    }
    out
}

/// Writes latency.json and latency.md into `dir`. Column A is the first
/// run passed to the comparison, column B the second.
pub fn write_latency_report(
    dir: &Path,
    comparison: &LatencyComparison,
    label_a: &str,
    label_b: &str,
) -> Result<(), ReportError> {
    write_file(
        &dir.join("latency.json"),
        &format!("{}\n", serde_json::to_string_pretty(comparison)?),
    )?;
    write_file(&dir.join("latency.md"), &render_latency_markdown(comparison, label_a, label_b))
}

pub fn render_latency_markdown(
    comparison: &LatencyComparison,
    label_a: &str,
    label_b: &str,
) -> String {
    let mut out = String::from("# Latency comparison\n\n");
    out.push_str(&format!("A = {label_a}, B = {label_b}. Stars follow the Welch p-value.\n\n"));
    out.push_str(
        "| Task | n | Mean A (ms) | Mean B (ms) | Reduction | t | p (Welch) | U | p (MWU) | Significance |\n",
    );
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---|\n");
    for row in &comparison.rows {
        let name = match row.task {
            Some(task) => task.display_name().to_string(),
            None => "Overall".to_string(),
        };
        out.push_str(&format!(
            "| {} | {} | {:.0} | {:.0} | {:.1}% | {:.2} | {:.2e} | {:.1} | {:.2e} | {} |\n",
            name,
            row.n,
            row.mean_a_ms,
            row.mean_b_ms,
            row.reduction_pct,
            row.t_statistic,
            row.p_welch,
            row.u_statistic,
            row.p_mwu,
            row.stars
        ));
    }
    out
}

/// Writes errors.json and errors.md into `dir`: one row per task that has
/// annotated episodes, one column per error category.
pub fn write_error_report(
    dir: &Path,
    counts: &BTreeMap<TaskKind, BTreeMap<ErrorCode, usize>>,
) -> Result<(), ReportError> {
    let json: BTreeMap<String, BTreeMap<String, usize>> = counts
        .iter()
        .map(|(task, by_code)| {
            (
                task.slug().to_string(),
                by_code.iter().map(|(code, n)| (code.as_str().to_string(), *n)).collect(),
            )
        })
        .collect();
    write_file(&dir.join("errors.json"), &format!("{}\n", serde_json::to_string_pretty(&json)?))?;
    write_file(&dir.join("errors.md"), &render_errors_markdown(counts))
}

pub fn render_errors_markdown(
    counts: &BTreeMap<TaskKind, BTreeMap<ErrorCode, usize>>,
) -> String {
    let mut out = String::from("# Error categories\n\n");
    if counts.is_empty() {
        out.push_str("No annotated episodes.\n");
        return out;
    }
    out.push_str("| Task |");
    for code in ErrorCode::ALL {
        out.push_str(&format!(" {} |", code.as_str()));
    }
    out.push_str(" Total |\n|---|");
    out.push_str(&"---:|".repeat(ErrorCode::ALL.len() + 1));
    out.push('\n');
    for (task, by_code) in counts {
        let total: usize = by_code.values().sum();
        out.push_str(&format!("| {} |", task.display_name()));
        for code in ErrorCode::ALL {
            out.push_str(&format!(" {} |", by_code.get(&code).copied().unwrap_or(0)));
        }
        out.push_str(&format!(" {total} |\n"));
    }
    out.push('\n');
    for code in ErrorCode::ALL {
        out.push_str(&format!("- {}: {}\n", code.as_str(), code.description()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::score::ScoreRule;
    use crate::domain::BenchmarkItem;
    use crate::pipeline::EpisodeOutcome;
    use crate::trace::EpisodeTrace;
    use tempfile::TempDir;

    fn graded(task: TaskKind, id: &str, score: f64) -> ScoredItem {
        ScoredItem {
            task,
            item_id: id.to_string(),
            score: ItemScore::Graded { verdict: Verdict::from_score(score, "t") },
            latency_ms: 100,
        }
    }

    fn spread(task: TaskKind, correct: usize, half: usize, error: usize) -> Vec<ScoredItem> {
        let mut items = Vec::new();
        for i in 0..correct {
            items.push(graded(task, &format!("{}_c{i}", task.slug()), 1.0));
        }
        for i in 0..half {
            items.push(graded(task, &format!("{}_h{i}", task.slug()), 0.5));
        }
        for i in 0..error {
            items.push(graded(task, &format!("{}_e{i}", task.slug()), 0.0));
        }
        items
    }

    #[test]
    fn bucket_mixes_give_the_expected_accuracies() {
        let cases: [(usize, usize, usize, f64); 6] = [
            (45, 0, 5, 0.90),
            (0, 45, 5, 0.45),
            (34, 5, 11, 0.73),
            (40, 7, 3, 0.87),
            (45, 3, 2, 0.93),
            (8, 1, 41, 0.17),
        ];
        for (correct, half, error, expected) in cases {
            let items = spread(TaskKind::GeneAlias, correct, half, error);
            let reports = aggregate(&items);
            assert_eq!(reports.len(), 1);
            let report = &reports[0];
            assert_eq!(report.n, correct + half + error);
            assert_eq!((report.correct, report.half, report.error), (correct, half, error));
            let rounded = (report.accuracy * 100.0).round() / 100.0;
            assert_eq!(rounded, expected, "({correct}, {half}, {error})");
        }
    }

    #[test]
    fn unscored_items_are_excluded_from_n_and_accuracy() {
        let mut items = spread(TaskKind::SnpGeneFunction, 3, 0, 1);
        items.push(ScoredItem {
            task: TaskKind::SnpGeneFunction,
            item_id: "u1".to_string(),
            score: ItemScore::Unscored { reason: "judge disabled".to_string() },
            latency_ms: 5,
        });
        let reports = aggregate(&items);
        let report = &reports[0];
        assert_eq!(report.n, 4);
        assert_eq!(report.unscored, 1);
        assert_eq!(report.accuracy, 0.75);
        assert_eq!(report.correct + report.half + report.error, report.n);
    }

    #[test]
    fn tasks_come_out_in_canonical_order() {
        let mut items = spread(TaskKind::SnpLocation, 1, 0, 0);
        items.extend(spread(TaskKind::GeneAlias, 1, 0, 0));
        items.extend(spread(TaskKind::ProteinCodingGenes, 1, 0, 0));
        let reports = aggregate(&items);
        let tasks: Vec<TaskKind> = reports.iter().map(|r| r.task).collect();
        assert_eq!(
            tasks,
            vec![TaskKind::GeneAlias, TaskKind::ProteinCodingGenes, TaskKind::SnpLocation]
        );
    }

    fn result_with_answer(id: &str, task: TaskKind, span: &str) -> QaResult {
        QaResult {
            episode_id: id.to_string(),
            question: "q".to_string(),
            task: Some(task),
            outcome: EpisodeOutcome::Answer {
                answer: crate::domain::FinalAnswer {
                    text: format!("Answer: {span}"),
                    answer_span: span.to_string(),
                    evidence_refs: vec![],
                    incomplete_evidence: false,
                },
            },
            latency_ms: 1234,
            llm_calls: 1,
            http_calls: 0,
            trace: EpisodeTrace { episode_id: id.to_string(), events: vec![] },
        }
    }

    fn tiny_dataset() -> LoadedDataset {
        LoadedDataset {
            suite: crate::domain::Suite::GeneTuring,
            items: vec![
                BenchmarkItem {
                    task: TaskKind::GeneAlias,
                    item_id: "a1".to_string(),
                    question: "alias?".to_string(),
                    gold: GoldAnswer::SingleString("PSMB10".to_string()),
                },
                BenchmarkItem {
                    task: TaskKind::SnpGeneFunction,
                    item_id: "f1".to_string(),
                    question: "function?".to_string(),
                    gold: GoldAnswer::FreeText("a lncRNA".to_string()),
                },
            ],
            warnings: vec![],
        }
    }

    #[test]
    fn grading_matches_episodes_to_items_by_id() {
        let results = vec![
            result_with_answer("a1", TaskKind::GeneAlias, "PSMB10"),
            result_with_answer("f1", TaskKind::SnpGeneFunction, "some function"),
        ];
        let mut warnings = Vec::new();
        let scored = score_results(
            &results,
            &tiny_dataset(),
            &SpeciesMap::builtin(),
            None,
            &mut warnings,
        )
        .unwrap();
        assert_eq!(scored.len(), 2);
        assert!(matches!(
            &scored[0].score,
            ItemScore::Graded { verdict } if verdict.score == 1.0
        ));
        assert!(matches!(
            &scored[1].score,
            ItemScore::Unscored { reason } if reason == "judge disabled"
        ));
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(scored[0].latency_ms, 1234);
    }

    #[test]
    fn failures_and_rejections_score_zero_not_unscored() {
        let mut failed = result_with_answer("a1", TaskKind::GeneAlias, "x");
        failed.outcome = EpisodeOutcome::Failure {
            stage: "llm".to_string(),
            message: "boom".to_string(),
        };
        let mut warnings = Vec::new();
        let scored = score_results(
            &[failed],
            &tiny_dataset(),
            &SpeciesMap::builtin(),
            None,
            &mut warnings,
        )
        .unwrap();
        match &scored[0].score {
            ItemScore::Graded { verdict } => {
                assert_eq!(verdict.score, 0.0);
                assert_eq!(verdict.detail, "no answer");
            }
            other => panic!("wrong score: {other:?}"),
        }
        // The unmatched dataset item shows up as a warning.
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("f1"), "{warnings:?}");
    }

    #[test]
    fn stray_episodes_are_skipped_with_a_warning() {
        let results = vec![result_with_answer("ghost", TaskKind::GeneAlias, "PSMB10")];
        let mut warnings = Vec::new();
        let scored = score_results(
            &results,
            &tiny_dataset(),
            &SpeciesMap::builtin(),
            None,
            &mut warnings,
        )
        .unwrap();
        assert!(scored.is_empty());
        assert!(warnings.iter().any(|w| w.contains("ghost")));
    }

    #[test]
    fn judge_grades_free_text_items_when_enabled() {
        use crate::agents::PromptLibrary;
        use crate::llm::ScriptedBackend;
        use std::sync::Arc;

        let prompts = PromptLibrary::from_entries(&[
            ("judge/semantic_system", "s"),
            ("judge/semantic", "{question}|{gold}|{prediction}"),
        ]);
        let judge = JudgeClient::new(
            Arc::new(ScriptedBackend::new(vec![
                r#"{"score": 0.5, "reason": "related but incomplete"}"#.to_string(),
            ])),
            prompts,
        );
        let results = vec![result_with_answer("f1", TaskKind::SnpGeneFunction, "an RNA gene")];
        let mut warnings = Vec::new();
        let scored = score_results(
            &results,
            &tiny_dataset(),
            &SpeciesMap::builtin(),
            Some(&judge),
            &mut warnings,
        )
        .unwrap();
        match &scored[0].score {
            ItemScore::Graded { verdict } => {
                assert_eq!(verdict.score, 0.5);
                assert_eq!(verdict.detail, "related but incomplete");
            }
            other => panic!("wrong score: {other:?}"),
        }
    }

    #[test]
    fn judge_failure_leaves_the_item_unscored_with_a_warning() {
        use crate::agents::PromptLibrary;
        use crate::llm::ScriptedBackend;
        use std::sync::Arc;

        let prompts = PromptLibrary::from_entries(&[
            ("judge/semantic_system", "s"),
            ("judge/semantic", "{question}|{gold}|{prediction}"),
        ]);
        let judge = JudgeClient::new(
            Arc::new(ScriptedBackend::new(vec!["junk".to_string(); 3])),
            prompts,
        );
        let results = vec![result_with_answer("f1", TaskKind::SnpGeneFunction, "an RNA gene")];
        let mut warnings = Vec::new();
        let scored = score_results(
            &results,
            &tiny_dataset(),
            &SpeciesMap::builtin(),
            Some(&judge),
            &mut warnings,
        )
        .unwrap();
        assert!(matches!(
            &scored[0].score,
            ItemScore::Unscored { reason } if reason.contains("judge failed")
        ));
        assert!(warnings.iter().any(|w| w.contains("judge failed")));
    }

    #[test]
    fn score_report_files_are_written_and_round_trip() {
        let dir = TempDir::new().unwrap();
        let items = spread(TaskKind::GeneAlias, 2, 1, 1);
        let report = ScoreReport {
            tasks: aggregate(&items),
            warnings: vec!["small sample".to_string()],
        };
        write_score_report(dir.path(), &report).unwrap();
        let json = std::fs::read_to_string(dir.path().join("scores.json")).unwrap();
        let parsed: ScoreReport = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, report);
        let markdown = std::fs::read_to_string(dir.path().join("scores.md")).unwrap();
        assert!(markdown.contains("| Gene alias | 4 | 2 | 1 | 1 | 0 | 0.62 |"), "{markdown}");
        assert!(markdown.contains("small sample"));
    }

    #[test]
    fn latency_markdown_has_a_row_per_task_plus_overall() {
        use crate::bench::stats::{compare_latency, LatencySample};
        let mk = |task: TaskKind, id: &str, ms: u64| LatencySample {
            task,
            item_id: id.to_string(),
            latency_ms: ms,
        };
        let a = vec![
            mk(TaskKind::GeneAlias, "1", 130_000),
            mk(TaskKind::GeneAlias, "2", 131_000),
        ];
        let b = vec![
            mk(TaskKind::GeneAlias, "1", 36_000),
            mk(TaskKind::GeneAlias, "2", 37_000),
        ];
        let comparison = compare_latency(&a, &b).unwrap();
        let dir = TempDir::new().unwrap();
        write_latency_report(dir.path(), &comparison, "monolithic", "multi_agent").unwrap();
        let markdown = std::fs::read_to_string(dir.path().join("latency.md")).unwrap();
        assert!(markdown.contains("| Gene alias | 2 |"), "{markdown}");
        assert!(markdown.contains("| Overall | 2 |"));
        assert!(markdown.contains("A = monolithic, B = multi_agent"));
        let json = std::fs::read_to_string(dir.path().join("latency.json")).unwrap();
        let parsed: LatencyComparison = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.rows.len(), 2);
    }

    #[test]
    fn error_counts_come_from_trace_annotations() {
        use crate::clock::FakeClock;
        use crate::domain::ErrorCategory;
        use crate::trace::TraceRecorder;
        use std::sync::Arc;

        let clock = Arc::new(FakeClock::new());
        let make = |id: &str, task: TaskKind, codes: &[ErrorCode]| {
            let recorder = TraceRecorder::new(id, clock.clone());
            for code in codes {
                recorder.record(
                    crate::trace::EventKind::Annotation,
                    serde_json::to_value(ErrorCategory {
                        code: *code,
                        note: "n".to_string(),
                    })
                    .unwrap(),
                );
            }
            let mut result = result_with_answer(id, task, "x");
            result.trace = recorder.finish();
            result.llm_calls = 0;
            result
        };
        let results = vec![
            make("a1", TaskKind::GeneAlias, &[ErrorCode::E3]),
            make("a2", TaskKind::GeneAlias, &[ErrorCode::E3, ErrorCode::E4]),
            make("s1", TaskKind::SnpLocation, &[ErrorCode::O]),
            make("s2", TaskKind::SnpLocation, &[]),
        ];
        let counts = error_counts(&results);
        assert_eq!(counts[&TaskKind::GeneAlias][&ErrorCode::E3], 2);
        assert_eq!(counts[&TaskKind::GeneAlias][&ErrorCode::E4], 1);
        assert_eq!(counts[&TaskKind::SnpLocation][&ErrorCode::O], 1);
        assert!(!counts.contains_key(&TaskKind::GeneLocation));

        let dir = TempDir::new().unwrap();
        write_error_report(dir.path(), &counts).unwrap();
        let markdown = std::fs::read_to_string(dir.path().join("errors.md")).unwrap();
        assert!(markdown.contains("| Gene alias | 0 | 0 | 2 | 1 | 0 | 0 | 3 |"), "{markdown}");
        assert!(markdown.contains("E1:"), "{markdown}");
    }

    #[test]
    fn species_rule_reuse_in_grading() {
        // Ensures score_results wires the species table through.
        let dataset = LoadedDataset {
            suite: crate::domain::Suite::GeneTuring,
            items: vec![BenchmarkItem {
                task: TaskKind::MultiSpeciesDnaAlignment,
                item_id: "m1".to_string(),
                question: "which species?".to_string(),
                gold: GoldAnswer::SpeciesName("rat".to_string()),
            }],
            warnings: vec![],
        };
        let results = vec![result_with_answer(
            "m1",
            TaskKind::MultiSpeciesDnaAlignment,
            "The best hit is Rattus norvegicus",
        )];
        let mut warnings = Vec::new();
        let scored =
            score_results(&results, &dataset, &SpeciesMap::builtin(), None, &mut warnings).unwrap();
        assert!(matches!(
            &scored[0].score,
            ItemScore::Graded { verdict } if verdict.score == 1.0
        ));
        let _ = ScoreRule::new(ScoreRuleKind::SpeciesMap);
    }
}
