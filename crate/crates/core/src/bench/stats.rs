//! Latency comparison statistics: Welch's unequal-variance t-test as the
//! primary significance test, with the Mann-Whitney U test reported
//! alongside because latency distributions are rarely normal.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::domain::TaskKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Two-sided Welch's t-test. With fewer than two observations on either
/// side there is nothing to test and the result is a null p of 1. When
/// both variances are zero the test degenerates: equal means give p 1,
/// different means p 0.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> TestResult {
    if a.len() < 2 || b.len() < 2 {
        return TestResult { statistic: 0.0, p_value: 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a, ma), sample_variance(b, mb));
    let se2 = va / na + vb / nb;
    if se2 <= 0.0 {
        return if ma == mb {
            TestResult { statistic: 0.0, p_value: 1.0 }
        } else {
            TestResult { statistic: f64::INFINITY.copysign(ma - mb), p_value: 0.0 }
        };
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    // Two-sided p through the regularized incomplete beta; the survival
    // form stays accurate for p-values far below f64 cdf resolution.
    let x = df / (df + t * t);
    let p = beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0);
    TestResult { statistic: t, p_value: p }
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Two-sided Mann-Whitney U with average ranks for ties, tie-corrected
/// normal approximation and continuity correction. The statistic is the
/// larger of the two U values.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> TestResult {
    if a.is_empty() || b.is_empty() {
        return TestResult { statistic: 0.0, p_value: 1.0 };
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));

    let n = pooled.len();
    let mut rank_sum_a = 0.0;
    let mut tie_correction = 0.0;
    let mut index = 0;
    while index < n {
        let mut end = index + 1;
        while end < n && pooled[end].0 == pooled[index].0 {
            end += 1;
        }
        let group = (end - index) as f64;
        // Ranks are 1-based; every member of a tie group gets the average.
        let average_rank = (index + 1 + end) as f64 / 2.0;
        for entry in &pooled[index..end] {
            if entry.1 {
                rank_sum_a += average_rank;
            }
        }
        tie_correction += group * group * group - group;
        index = end;
    }

    let u1 = rank_sum_a - na * (na + 1.0) / 2.0;
    let u2 = na * nb - u1;
    let u_big = u1.max(u2);
    let mu = na * nb / 2.0;
    let n_total = na + nb;
    let variance = na * nb / 12.0
        * ((n_total + 1.0) - tie_correction / (n_total * (n_total - 1.0)));
    if variance <= 0.0 {
        return TestResult { statistic: u_big, p_value: 1.0 };
    }
    let z = (u_big - mu - 0.5) / variance.sqrt();
    let p = (2.0 * normal_sf(z)).min(1.0);
    TestResult { statistic: u_big, p_value: p }
}

/// Conventional significance marks; anything at or above 0.05 is "n.s.".
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "n.s."
    }
}

/// How much faster `b` is than `a`, as a percentage of `a`.
pub fn reduction_pct(mean_a: f64, mean_b: f64) -> f64 {
    if mean_a == 0.0 {
        return 0.0;
    }
    (mean_a - mean_b) / mean_a * 100.0
}

/// One episode's wall-clock latency under one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencySample {
    pub task: TaskKind,
    pub item_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    /// Task slug, or "overall" for the all-tasks row.
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
    pub n: usize,
    pub mean_a_ms: f64,
    pub mean_b_ms: f64,
    pub reduction_pct: f64,
    pub t_statistic: f64,
    pub p_welch: f64,
    pub u_statistic: f64,
    pub p_mwu: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyComparison {
    pub rows: Vec<LatencyRow>,
}

impl LatencyComparison {
    pub fn overall(&self) -> Option<&LatencyRow> {
        self.rows.iter().find(|r| r.task.is_none())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("latency comparison for {label}: item sets differ (only in a: [{}]; only in b: [{}])",
        only_in_a.join(", "), only_in_b.join(", "))]
    MismatchedItems { label: String, only_in_a: Vec<String>, only_in_b: Vec<String> },
    #[error("latency comparison for {label}: duplicate item id {id:?}")]
    DuplicateItem { label: String, id: String },
    #[error("latency comparison has no samples")]
    Empty,
}

fn group(
    samples: &[LatencySample],
) -> Result<BTreeMap<TaskKind, BTreeMap<&str, f64>>, StatsError> {
    let mut map: BTreeMap<TaskKind, BTreeMap<&str, f64>> = BTreeMap::new();
    for sample in samples {
        let per_task = map.entry(sample.task).or_default();
        if per_task.insert(sample.item_id.as_str(), sample.latency_ms as f64).is_some() {
            return Err(StatsError::DuplicateItem {
                label: sample.task.slug().to_string(),
                id: sample.item_id.clone(),
            });
        }
    }
    Ok(map)
}

fn build_row(label: String, task: Option<TaskKind>, a: &[f64], b: &[f64]) -> LatencyRow {
    let (mean_a, mean_b) = (mean(a), mean(b));
    let welch = welch_t_test(a, b);
    let mwu = mann_whitney_u(a, b);
    LatencyRow {
        label,
        task,
        n: a.len(),
        mean_a_ms: mean_a,
        mean_b_ms: mean_b,
        reduction_pct: reduction_pct(mean_a, mean_b),
        t_statistic: welch.statistic,
        p_welch: welch.p_value,
        u_statistic: mwu.statistic,
        p_mwu: mwu.p_value,
        stars: significance_stars(welch.p_value).to_string(),
    }
}

/// Paired comparison of two runs over the same items: one row per task in
/// canonical order, then an overall row. Items must match exactly within
/// each task; a partial overlap would silently bias both means.
pub fn compare_latency(
    a: &[LatencySample],
    b: &[LatencySample],
) -> Result<LatencyComparison, StatsError> {
    if a.is_empty() && b.is_empty() {
        return Err(StatsError::Empty);
    }
    let grouped_a = group(a)?;
    let grouped_b = group(b)?;
    let tasks: Vec<TaskKind> = {
        let mut all: Vec<TaskKind> = grouped_a.keys().chain(grouped_b.keys()).copied().collect();
        all.sort();
        all.dedup();
        all
    };

    let empty = BTreeMap::new();
    let mut rows = Vec::new();
    let mut all_a = Vec::new();
    let mut all_b = Vec::new();
    for task in tasks {
        let items_a = grouped_a.get(&task).unwrap_or(&empty);
        let items_b = grouped_b.get(&task).unwrap_or(&empty);
        let only_in_a: Vec<String> = items_a
            .keys()
            .filter(|id| !items_b.contains_key(**id))
            .map(|id| id.to_string())
            .collect();
        let only_in_b: Vec<String> = items_b
            .keys()
            .filter(|id| !items_a.contains_key(**id))
            .map(|id| id.to_string())
            .collect();
        if !only_in_a.is_empty() || !only_in_b.is_empty() {
            return Err(StatsError::MismatchedItems {
                label: task.slug().to_string(),
                only_in_a,
                only_in_b,
            });
        }
        // Identical key sets; BTreeMap order pairs them up.
        let task_a: Vec<f64> = items_a.values().copied().collect();
        let task_b: Vec<f64> = items_b.values().copied().collect();
        rows.push(build_row(task.slug().to_string(), Some(task), &task_a, &task_b));
        all_a.extend(task_a);
        all_b.extend(task_b);
    }
    rows.push(build_row("overall".to_string(), None, &all_a, &all_b));
    Ok(LatencyComparison { rows })
}
