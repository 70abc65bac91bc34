//! Benchmark dataset loading. A dataset is a directory with one JSON file
//! per task, named by the task slug. Two file shapes are accepted: a list
//! of `{id, question, answer}` records, or the published `{question: answer}`
//! map, in which case ids are generated in file order.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::bench::score::binary_label;
use crate::domain::{parse_genome_locus, BenchmarkItem, GoldAnswer, Suite, TaskKind};

/// Below this per-task size the sample is too small to quote accuracies
/// without a caveat.
pub const SMALL_TASK_THRESHOLD: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("missing dataset file for task {task}: expected {path}")]
    MissingTaskFile { task: TaskKind, path: PathBuf },
    #[error("{path} does not name a benchmark task; known slugs: {known}")]
    UnknownFile { path: PathBuf, known: String },
    #[error("{path} contains no items")]
    EmptyFile { path: PathBuf },
    #[error("{path}: duplicate item id {id:?}")]
    DuplicateId { path: PathBuf, id: String },
    #[error("task {task}, item {item}: {message}")]
    BadAnswer { task: TaskKind, item: String, message: String },
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub suite: Suite,
    pub items: Vec<BenchmarkItem>,
    pub warnings: Vec<String>,
}

impl LoadedDataset {
    /// Items grouped by task, in canonical task order.
    pub fn by_task(&self) -> BTreeMap<TaskKind, Vec<&BenchmarkItem>> {
        let mut map: BTreeMap<TaskKind, Vec<&BenchmarkItem>> = BTreeMap::new();
        for item in &self.items {
            map.entry(item.task).or_default().push(item);
        }
        map
    }

    /// Keeps only the first `limit` items of each task, preserving order.
    pub fn limit_per_task(&mut self, limit: usize) {
        let mut seen: BTreeMap<TaskKind, usize> = BTreeMap::new();
        self.items.retain(|item| {
            let count = seen.entry(item.task).or_insert(0);
            *count += 1;
            *count <= limit
        });
    }
}

/// Loads the files for every task in `suite` from `dir`. Files belonging
/// to the other suite are ignored; files matching no task at all are an
/// error so typos do not silently drop a task.
pub fn load_dataset(dir: &Path, suite: Suite) -> Result<LoadedDataset, DatasetError> {
    let known: BTreeSet<&'static str> = TaskKind::ALL.iter().map(|t| t.slug()).collect();
    let entries = std::fs::read_dir(dir).map_err(|source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| DatasetError::Io { path: dir.to_path_buf(), source })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if !known.contains(stem) {
            return Err(DatasetError::UnknownFile {
                path,
                known: known.iter().copied().collect::<Vec<_>>().join(", "),
            });
        }
    }

    let mut items = Vec::new();
    let mut warnings = Vec::new();
    for task in TaskKind::of_suite(suite) {
        let path = dir.join(format!("{}.json", task.slug()));
        if !path.is_file() {
            return Err(DatasetError::MissingTaskFile { task, path });
        }
        let loaded = load_task_file(&path, task, &mut warnings)?;
        if loaded.len() < SMALL_TASK_THRESHOLD {
            warnings.push(format!(
                "task {} has only {} items; accuracies will be noisy",
                task.slug(),
                loaded.len()
            ));
        }
        items.extend(loaded);
    }
    Ok(LoadedDataset { suite, items, warnings })
}

/// Loads one task file in either accepted shape.
pub fn load_task_file(
    path: &Path,
    task: TaskKind,
    warnings: &mut Vec<String>,
) -> Result<Vec<BenchmarkItem>, DatasetError> {
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text).map_err(|source| DatasetError::Parse {
        path: path.to_path_buf(),
        source,
    })?;

    let mut items = Vec::new();
    match value {
        Value::Array(records) => {
            for (index, record) in records.into_iter().enumerate() {
                let id = record
                    .get("id")
                    .and_then(Value::as_str)
                    .map(str::to_string)
                    .unwrap_or_else(|| generated_id(task, index));
                let question = record
                    .get("question")
                    .and_then(Value::as_str)
                    .ok_or_else(|| DatasetError::BadAnswer {
                        task,
                        item: id.clone(),
                        message: "record has no question field".to_string(),
                    })?
                    .to_string();
                let answer = record.get("answer").cloned().ok_or_else(|| {
                    DatasetError::BadAnswer {
                        task,
                        item: id.clone(),
                        message: "record has no answer field".to_string(),
                    }
                })?;
                let gold = parse_gold(task, &id, &answer, warnings)?;
                items.push(BenchmarkItem { task, item_id: id, question, gold });
            }
        }
        Value::Object(map) => {
            // Published shape: insertion order in the file is the item order.
            for (index, (question, answer)) in map.into_iter().enumerate() {
                let id = generated_id(task, index);
                let gold = parse_gold(task, &id, &answer, warnings)?;
                items.push(BenchmarkItem { task, item_id: id, question, gold });
            }
        }
        _ => {
            return Err(DatasetError::BadAnswer {
                task,
                item: String::new(),
                message: "file must be a JSON array of records or a question-to-answer map"
                    .to_string(),
            })
        }
    }

    if items.is_empty() {
        return Err(DatasetError::EmptyFile { path: path.to_path_buf() });
    }
    let mut seen = BTreeSet::new();
    for item in &items {
        if !seen.insert(item.item_id.clone()) {
            return Err(DatasetError::DuplicateId {
                path: path.to_path_buf(),
                id: item.item_id.clone(),
            });
        }
    }
    Ok(items)
}

fn generated_id(task: TaskKind, index: usize) -> String {
    format!("{}_{:03}", task.slug(), index + 1)
}

fn answer_text(task: TaskKind, id: &str, answer: &Value) -> Result<String, DatasetError> {
    match answer {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(DatasetError::BadAnswer {
            task,
            item: id.to_string(),
            message: format!("expected a string answer, got {other}"),
        }),
    }
}

fn parse_gold(
    task: TaskKind,
    id: &str,
    answer: &Value,
    warnings: &mut Vec<String>,
) -> Result<GoldAnswer, DatasetError> {
    match task {
        TaskKind::GeneAlias
        | TaskKind::GeneLocation
        | TaskKind::GeneNameConversion
        | TaskKind::GeneSnpAssociation
        | TaskKind::SnpLocation => {
            Ok(GoldAnswer::SingleString(answer_text(task, id, answer)?.trim().to_string()))
        }
        TaskKind::GeneDiseaseAssociation
        | TaskKind::DiseaseGeneLocation
        | TaskKind::SequenceGeneAlias => {
            let set = match answer {
                Value::Array(values) => values
                    .iter()
                    .map(|v| answer_text(task, id, v).map(|s| s.trim().to_string()))
                    .collect::<Result<Vec<_>, _>>()?,
                other => split_list(&answer_text(task, id, other)?),
            };
            let set: Vec<String> = set.into_iter().filter(|s| !s.is_empty()).collect();
            if set.is_empty() {
                return Err(DatasetError::BadAnswer {
                    task,
                    item: id.to_string(),
                    message: "gold answer set is empty".to_string(),
                });
            }
            Ok(GoldAnswer::StringSet(set))
        }
        TaskKind::HumanGenomeDnaAlignment => {
            let text = answer_text(task, id, answer)?;
            let locus = parse_genome_locus(&text).ok_or_else(|| DatasetError::BadAnswer {
                task,
                item: id.to_string(),
                message: format!("gold answer {text:?} is not a genome locus"),
            })?;
            Ok(GoldAnswer::GenomeLocus(locus))
        }
        TaskKind::MultiSpeciesDnaAlignment => {
            Ok(GoldAnswer::SpeciesName(answer_text(task, id, answer)?.trim().to_string()))
        }
        TaskKind::ProteinCodingGenes => {
            let text = answer_text(task, id, answer)?;
            let trimmed = text.trim();
            let canonical = trimmed.to_uppercase();
            if canonical == "TRUE" || canonical == "NA" {
                return Ok(GoldAnswer::SingleString(canonical));
            }
            let mapped = binary_label(trimmed).ok_or_else(|| DatasetError::BadAnswer {
                task,
                item: id.to_string(),
                message: format!("gold answer {trimmed:?} maps to neither TRUE nor NA"),
            })?;
            warnings.push(format!(
                "item {id}: gold answer {trimmed:?} normalized to {mapped}"
            ));
            Ok(GoldAnswer::SingleString(mapped.to_string()))
        }
        TaskKind::SnpGeneFunction => {
            Ok(GoldAnswer::FreeText(answer_text(task, id, answer)?.trim().to_string()))
        }
    }
}

fn split_list(text: &str) -> Vec<String> {
    text.replace(';', ",")
        .split(',')
        .map(|part| part.trim().to_string())
        .collect()
}
