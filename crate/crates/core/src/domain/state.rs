//! Conversation state threaded through controllers and tool agents.

use crate::domain::TaskKind;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Who produced a message in the episode transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// The tool agents plus the controllers' reject arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Eutils,
    Blast,
    WebSearch,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Eutils => "eutils",
            AgentKind::Blast => "blast",
            AgentKind::WebSearch => "web_search",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The concrete request a tool agent issued, kept alongside the response so
/// traces can be replayed and deduplication keys recomputed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInvocation {
    pub agent: AgentKind,
    pub method: String,
    pub url: String,
    /// Canonical `k=v&k=v` form of the request parameters; the
    /// deduplication key within an episode.
    pub canonical_params: String,
}

/// One tool call and what came back, already truncated to the response byte
/// cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolResult {
    pub invocation: ToolInvocation,
    /// Response body as text, lossily decoded and truncated.
    pub raw_response: String,
    /// Parsed JSON body when the response was JSON, `null` otherwise.
    pub parsed: serde_json::Value,
    pub latency_ms: u64,
    pub from_cache: bool,
}

/// Mutable state of one question-answering episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationState {
    pub question: String,
    pub task: Option<TaskKind>,
    pub messages: Vec<Message>,
    pub tool_results: Vec<ToolResult>,
    /// Evaluator feedback handed to the router on a re-route.
    pub router_feedback: Option<String>,
    /// Number of controller decisions taken so far.
    pub step_count: u32,
    pub terminated: bool,
}

impl ConversationState {
    pub fn new(question: impl Into<String>, task: Option<TaskKind>) -> Self {
        let question = question.into();
        ConversationState {
            messages: vec![Message { role: Role::User, content: question.clone() }],
            question,
            task,
            tool_results: Vec::new(),
            router_feedback: None,
            step_count: 0,
            terminated: false,
        }
    }

    pub fn push_tool_result(&mut self, result: ToolResult) {
        self.messages.push(Message {
            role: Role::Tool,
            content: format!("[{}] {}", result.invocation.agent, result.raw_response),
        });
        self.tool_results.push(result);
    }

    /// Renders gathered evidence for controller prompts: one numbered block
    /// per tool result.
    pub fn evidence_text(&self) -> String {
        if self.tool_results.is_empty() {
            return "(no tool results yet)".to_string();
        }
        let mut out = String::new();
        for (idx, result) in self.tool_results.iter().enumerate() {
            if idx > 0 {
                out.push('\n');
            }
            out.push_str(&format!(
                "[{}] {} {}\n{}",
                idx + 1,
                result.invocation.agent,
                result.invocation.url,
                result.raw_response
            ));
        }
        out
    }
}

/// The episode's terminal answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalAnswer {
    /// Full generated text.
    pub text: String,
    /// The span after the final answer marker, used for scoring.
    pub answer_span: String,
    /// Indices into the episode's tool results that were available when the
    /// answer was generated.
    pub evidence_refs: Vec<usize>,
    /// Set when generation was forced before the evaluator was satisfied.
    pub incomplete_evidence: bool,
}

/// A validated nucleotide sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DnaSequence(String);

pub const MIN_SEQUENCE_LEN: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("sequence contains characters outside ACGTN: {0:?}")]
    BadAlphabet(String),
    #[error("sequence too short: {0} bases, need at least {min}", min = MIN_SEQUENCE_LEN)]
    TooShort(usize),
}

impl DnaSequence {
    /// Uppercases, strips whitespace, and validates the ACGTN alphabet and
    /// the minimum length a BLAST query needs.
    pub fn parse(raw: &str) -> Result<Self, SequenceError> {
        let cleaned: String = raw
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_ascii_uppercase())
            .collect();
        let bad: String = cleaned
            .chars()
            .filter(|c| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'N'))
            .collect();
        if !bad.is_empty() {
            return Err(SequenceError::BadAlphabet(bad));
        }
        if cleaned.len() < MIN_SEQUENCE_LEN {
            return Err(SequenceError::TooShort(cleaned.len()));
        }
        Ok(DnaSequence(cleaned))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for DnaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for DnaSequence {
    type Error = SequenceError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        DnaSequence::parse(&value)
    }
}

impl From<DnaSequence> for String {
    fn from(value: DnaSequence) -> Self {
        value.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_state_starts_with_the_question() {
        let state = ConversationState::new("Which chromosome?", Some(TaskKind::GeneLocation));
        assert_eq!(state.messages.len(), 1);
        assert_eq!(state.messages[0].role, Role::User);
        assert_eq!(state.step_count, 0);
        assert!(!state.terminated);
        assert!(state.tool_results.is_empty());
    }

    #[test]
    fn sequence_parse_normalises() {
        let seq = DnaSequence::parse("acgt acgTN\nACG").unwrap();
        assert_eq!(seq.as_str(), "ACGTACGTNACG");
        assert_eq!(seq.len(), 12);
    }

    #[test]
    fn sequence_parse_rejects_bad_alphabet_listing_offenders() {
        let err = DnaSequence::parse("ACGTXACGTZACG").unwrap_err();
        assert_eq!(err, SequenceError::BadAlphabet("XZ".to_string()));
    }

    #[test]
    fn sequence_parse_rejects_short_input() {
        assert_eq!(
            DnaSequence::parse("ACGTACGTAA").unwrap_err(),
            SequenceError::TooShort(10)
        );
        assert!(DnaSequence::parse("ACGTACGTACG").is_ok());
    }

    #[test]
    fn evidence_text_numbers_results() {
        let mut state = ConversationState::new("q", None);
        assert_eq!(state.evidence_text(), "(no tool results yet)");
        state.push_tool_result(ToolResult {
            invocation: ToolInvocation {
                agent: AgentKind::Eutils,
                method: "GET".to_string(),
                url: "https://example.test/a".to_string(),
                canonical_params: "db=gene".to_string(),
            },
            raw_response: "body".to_string(),
            parsed: serde_json::Value::Null,
            latency_ms: 3,
            from_cache: false,
        });
        let text = state.evidence_text();
        assert!(text.starts_with("[1] eutils https://example.test/a"));
        assert!(text.contains("body"));
        assert_eq!(state.messages.len(), 2);
        assert_eq!(state.messages[1].role, Role::Tool);
    }
}
