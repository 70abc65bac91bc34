//! Chat-completion gateway.
//!
//! One trait covers both a deterministic scripted backend (tests, replay,
//! offline benchmarks) and a remote HTTP chat endpoint. Stop-sequence
//! handling is done client-side so both kinds behave identically, and
//! structured output goes through a JSON contract with bounded repair
//! retries.

mod backend;
mod contract;
mod gateway;

pub use backend::{
    complete, BackendConfig, ChatBackend, RawCompletion, RemoteHttpBackend, ScriptedBackend,
};
pub use contract::{
    complete_structured, complete_structured_with, extract_first_json, ContractViolation,
    JsonContract, StructuredOutcome, ValueKind,
};
pub use gateway::{BackendRole, EpisodeGateway};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChatRole {
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: ChatRole::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop_sequences: Vec<String>,
}

impl ChatRequest {
    pub fn new(system_prompt: impl Into<String>, user_content: impl Into<String>) -> Self {
        ChatRequest {
            system_prompt: system_prompt.into(),
            messages: vec![ChatMessage::user(user_content)],
            temperature: 0.0,
            max_tokens: 1024,
            stop_sequences: Vec::new(),
        }
    }

    pub fn with_stop(mut self, stops: &[&str]) -> Self {
        self.stop_sequences = stops.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.messages.is_empty() {
            return Err(LlmError::Config("chat request has no messages".to_string()));
        }
        if self.stop_sequences.iter().any(String::is_empty) {
            return Err(LlmError::Config("empty stop sequence".to_string()));
        }
        if !(0.0..=1.0).contains(&self.temperature) {
            return Err(LlmError::Config(format!(
                "temperature {} outside [0, 1]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::Config("max_tokens must be positive".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FinishReason {
    Stop,
    StopSequence,
    Length,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt: u32,
    pub completion: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    /// Generated text, truncated before the first matched stop sequence.
    pub text: String,
    pub finish_reason: FinishReason,
    /// The stop sequence that ended generation, when one did.
    pub matched_stop: Option<String>,
    /// Text the backend produced past the stop match. Present only when the
    /// match happened client-side (scripted backends, servers that ignore
    /// stops); lets callers read ahead without another model call.
    pub truncated_tail: Option<String>,
    pub token_usage: Option<TokenUsage>,
}

impl ChatResponse {
    /// The backend's verbatim output with any client-side truncation
    /// undone. Recorded in traces so a replay reproduces the same split.
    pub fn full_text(&self) -> String {
        match (&self.matched_stop, &self.truncated_tail) {
            (Some(stop), Some(tail)) => format!("{}{}{}", self.text, stop, tail),
            _ => self.text.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("llm transport error ({}retryable): {message}", if *.retryable { "" } else { "not " })]
    Transport { message: String, retryable: bool },
    #[error("llm backend returned status {status}: {body_excerpt}")]
    Backend { status: u16, body_excerpt: String },
    #[error("scripted backend exhausted after {calls_made} calls")]
    ScriptExhausted { calls_made: usize },
    #[error("llm configuration error: {0}")]
    Config(String),
    #[error("episode llm budget of {max} calls exhausted")]
    BudgetExhausted { max: u32 },
    #[error(transparent)]
    Contract(#[from] ContractViolation),
}
