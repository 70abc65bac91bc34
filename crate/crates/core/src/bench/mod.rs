//! Offline benchmark harness: dataset loading, per-task scoring rules, an
//! optional model judge for free-text answers, latency statistics and the
//! written report artifacts.

pub mod dataset;
pub mod judge;
pub mod report;
pub mod score;
pub mod stats;

pub use dataset::{
    load_dataset, load_task_file, DatasetError, LoadedDataset, SMALL_TASK_THRESHOLD,
};
pub use judge::{JudgeClient, JudgeError, DEFAULT_JUDGE_REPAIRS};
pub use report::{
    aggregate, error_counts, render_errors_markdown, render_latency_markdown,
    render_scores_markdown, score_results, write_error_report, write_latency_report,
    write_score_report, ItemScore, ReportError, ScoreReport, ScoredItem, TaskReport,
};
pub use score::{
    binary_label, rule_for_task, score_binary, score_genome_alignment, score_item,
    score_item_with_rule, score_recall, score_species, score_string_match, Bucket, CaseMode,
    ScoreError, ScoreRule, ScoreRuleKind, SpeciesMap, Verdict,
};
pub use stats::{
    compare_latency, mann_whitney_u, reduction_pct, significance_stars, welch_t_test,
    LatencyComparison, LatencyRow, LatencySample, StatsError, TestResult,
};
