//! Core vocabulary shared by every other layer: benchmark tasks, gold
//! answers, genome loci, conversation state and error taxonomy.

mod answer;
mod item;
mod locus;
mod params;
mod state;
mod task;

pub use answer::{parse_answer_span, ANSWER_MARKER};
pub use item::{BenchmarkItem, GoldAnswer};
pub use locus::{normalize_chromosome, parse_genome_locus, GenomeLocus, LocusError};
pub use params::canonicalize_params;
pub use state::{
    AgentKind, ConversationState, DnaSequence, FinalAnswer, Message, Role, SequenceError,
    ToolInvocation, ToolResult,
};
pub use task::{ApiKind, Suite, TaskKind, TaskKindError};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Failure taxonomy used by the error report. Codes follow the five analysis
/// buckets plus a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCode {
    /// Wrong tool or endpoint chosen for the question.
    E1,
    /// Malformed or invalid tool arguments.
    E2,
    /// Tool output misread or misquoted.
    E3,
    /// Correct evidence gathered but wrong conclusion drawn.
    E4,
    /// Gave up, hit a budget, or produced no usable answer.
    E5,
    /// Other.
    O,
}

impl ErrorCode {
    pub const ALL: [ErrorCode; 6] = [
        ErrorCode::E1,
        ErrorCode::E2,
        ErrorCode::E3,
        ErrorCode::E4,
        ErrorCode::E5,
        ErrorCode::O,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::E1 => "E1",
            ErrorCode::E2 => "E2",
            ErrorCode::E3 => "E3",
            ErrorCode::E4 => "E4",
            ErrorCode::E5 => "E5",
            ErrorCode::O => "O",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ErrorCode::E1 => "wrong tool or endpoint selected",
            ErrorCode::E2 => "malformed tool arguments",
            ErrorCode::E3 => "tool output misread",
            ErrorCode::E4 => "wrong conclusion from correct evidence",
            ErrorCode::E5 => "no usable answer produced",
            ErrorCode::O => "other",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error code {0:?}, expected one of E1..E5 or O")]
pub struct ErrorCodeParseError(pub String);

impl FromStr for ErrorCode {
    type Err = ErrorCodeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "E1" => Ok(ErrorCode::E1),
            "E2" => Ok(ErrorCode::E2),
            "E3" => Ok(ErrorCode::E3),
            "E4" => Ok(ErrorCode::E4),
            "E5" => Ok(ErrorCode::E5),
            "O" => Ok(ErrorCode::O),
            other => Err(ErrorCodeParseError(other.to_string())),
        }
    }
}

/// A manual annotation attached to an episode trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorCategory {
    pub code: ErrorCode,
    pub note: String,
}
