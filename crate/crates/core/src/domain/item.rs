//! Benchmark items and gold answers.

use crate::domain::{GenomeLocus, TaskKind};
use serde::{Deserialize, Serialize};

/// The reference answer for one benchmark question. The variant decides
/// which scoring rule applies cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GoldAnswer {
    /// One expected string (gene symbol, chromosome name, binary label).
    SingleString(String),
    /// A set of expected strings graded by recall. Non-empty.
    StringSet(Vec<String>),
    /// A full genome locus for alignment answers.
    GenomeLocus(GenomeLocus),
    /// A species common name resolved through the synonym table.
    SpeciesName(String),
    /// Free text graded semantically.
    FreeText(String),
}

impl GoldAnswer {
    /// Human-readable form used in reports and judge prompts.
    pub fn display(&self) -> String {
        match self {
            GoldAnswer::SingleString(s)
            | GoldAnswer::SpeciesName(s)
            | GoldAnswer::FreeText(s) => s.clone(),
            GoldAnswer::StringSet(set) => set.join(", "),
            GoldAnswer::GenomeLocus(locus) => locus.to_string(),
        }
    }
}

/// One benchmark question with its gold answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkItem {
    pub task: TaskKind,
    pub item_id: String,
    pub question: String,
    pub gold: GoldAnswer,
}
