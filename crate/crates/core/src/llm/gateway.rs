//! Budgeted, traced model access for one episode.
//!
//! Every model call in an episode flows through here so the call budget
//! is enforced in one place and every generation lands in the trace with
//! its full pre-truncation text.

use crate::llm::{complete, ChatBackend, ChatRequest, ChatResponse, LlmError};
use crate::trace::{EventKind, TraceRecorder};
use std::sync::atomic::{AtomicU32, Ordering};

/// Which backend a call goes to. The multi-agent pipeline may run
/// controllers and tool agents on different models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendRole {
    Controller,
    Agent,
}

/// Repair attempts granted to structured-output callers by default.
pub const DEFAULT_MAX_REPAIRS: u32 = 2;

pub struct EpisodeGateway<'a> {
    controller: &'a dyn ChatBackend,
    agent: &'a dyn ChatBackend,
    recorder: &'a TraceRecorder,
    max_llm_calls: u32,
    max_repairs: u32,
    used: AtomicU32,
}

impl<'a> EpisodeGateway<'a> {
    pub fn new(
        controller: &'a dyn ChatBackend,
        agent: &'a dyn ChatBackend,
        recorder: &'a TraceRecorder,
        max_llm_calls: u32,
    ) -> Self {
        EpisodeGateway {
            controller,
            agent,
            recorder,
            max_llm_calls,
            max_repairs: DEFAULT_MAX_REPAIRS,
            used: AtomicU32::new(0),
        }
    }

    pub fn with_max_repairs(mut self, max_repairs: u32) -> Self {
        self.max_repairs = max_repairs;
        self
    }

    /// Single-backend gateway: the monolithic loop and any pipeline
    /// without a separate agent model.
    pub fn single(
        backend: &'a dyn ChatBackend,
        recorder: &'a TraceRecorder,
        max_llm_calls: u32,
    ) -> Self {
        EpisodeGateway::new(backend, backend, recorder, max_llm_calls)
    }

    pub fn recorder(&self) -> &TraceRecorder {
        self.recorder
    }

    pub fn calls_used(&self) -> u32 {
        self.used.load(Ordering::SeqCst)
    }

    pub fn max_llm_calls(&self) -> u32 {
        self.max_llm_calls
    }

    pub fn max_repairs(&self) -> u32 {
        self.max_repairs
    }

    /// One model call, counted against the episode budget and recorded.
    /// `purpose` names the caller (router, evaluator, generator, an agent,
    /// or the monolithic loop) for trace analysis.
    pub fn complete(
        &self,
        role: BackendRole,
        purpose: &str,
        request: &ChatRequest,
    ) -> Result<ChatResponse, LlmError> {
        if self.used.load(Ordering::SeqCst) >= self.max_llm_calls {
            return Err(LlmError::BudgetExhausted { max: self.max_llm_calls });
        }
        let backend = match role {
            BackendRole::Controller => self.controller,
            BackendRole::Agent => self.agent,
        };
        let response = complete(backend, request)?;
        self.used.fetch_add(1, Ordering::SeqCst);
        let request_user = request
            .messages
            .iter()
            .rev()
            .find(|m| m.role == crate::llm::ChatRole::User)
            .map(|m| m.content.clone());
        self.recorder.record(
            EventKind::LlmCall,
            serde_json::json!({
                "purpose": purpose,
                "backend": backend.name(),
                "stop": request.stop_sequences,
                "request_user": request_user,
                "finish_reason": response.finish_reason,
                "matched_stop": response.matched_stop,
                "full_text": response.full_text(),
            }),
        );
        Ok(response)
    }
}
