//! Episode execution: the monolithic bracket-call loop, the routed
//! multi-agent loop, prompt profiles, and the batch runner that writes
//! run directories.

mod batch;
mod monolithic;
mod multi_agent;
mod profile;

pub use batch::{
    run_batch, safe_file_stem, BatchError, EpisodeInput, RunManifest, RunOutput,
    TransportManifest, DEFAULT_WORKERS,
};
pub use monolithic::run_monolithic;
pub use multi_agent::run_multi_agent;
pub use profile::{
    build_prompt, DemoKind, DocKind, ProfileName, PromptProfile, PromptStyle,
};

use crate::agents::{PromptLibrary, ToolContext};
use crate::domain::{FinalAnswer, TaskKind};
use crate::llm::{BackendConfig, ChatBackend, LlmError};
use crate::trace::{EpisodeTrace, EventKind, TraceRecorder};
use crate::transport::{BlastClient, BlastConfig, Transport};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    Monolithic,
    MultiAgent,
}

pub const DEFAULT_MAX_AGENT_STEPS: u32 = 6;
pub const DEFAULT_MAX_LLM_CALLS: u32 = 20;

fn default_max_agent_steps() -> u32 {
    DEFAULT_MAX_AGENT_STEPS
}

fn default_max_llm_calls() -> u32 {
    DEFAULT_MAX_LLM_CALLS
}

fn default_profile() -> PromptProfile {
    PromptProfile::full()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub controller_backend: BackendConfig,
    /// Distinct tool-agent backend; absent means the controller backend
    /// serves both roles.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_backend: Option<BackendConfig>,
    #[serde(default = "default_max_agent_steps")]
    pub max_agent_steps: u32,
    #[serde(default = "default_max_llm_calls")]
    pub max_llm_calls: u32,
    #[serde(default = "default_profile")]
    pub profile: PromptProfile,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PipelineConfigError {
    #[error("monolithic mode uses a single backend; remove agent_backend")]
    AgentBackendInMonolithic,
    #[error("{0} must be at least 1")]
    ZeroBudget(&'static str),
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineConfigError> {
        if self.mode == PipelineMode::Monolithic && self.agent_backend.is_some() {
            return Err(PipelineConfigError::AgentBackendInMonolithic);
        }
        if self.max_llm_calls == 0 {
            return Err(PipelineConfigError::ZeroBudget("max_llm_calls"));
        }
        if self.mode == PipelineMode::MultiAgent && self.max_agent_steps == 0 {
            return Err(PipelineConfigError::ZeroBudget("max_agent_steps"));
        }
        Ok(())
    }
}

/// Everything an episode runs against; shared by every episode of a run.
pub struct RunResources {
    pub transport: Arc<Transport>,
    pub blast: BlastClient,
    pub prompts: PromptLibrary,
    pub controller: Arc<dyn ChatBackend>,
    pub agent: Arc<dyn ChatBackend>,
    pub ncbi_api_key: Option<String>,
    pub search_credentials: Option<(String, String)>,
}

fn env_nonempty(name: &str) -> Option<String> {
    std::env::var(name).ok().filter(|v| !v.is_empty())
}

impl RunResources {
    /// Builds backends from the config and reads API credentials from the
    /// environment (NCBI_API_KEY, GOOGLE_CSE_KEY, GOOGLE_CSE_ID). Secrets
    /// never appear in manifests.
    pub fn build(
        config: &PipelineConfig,
        transport: Arc<Transport>,
        prompts: PromptLibrary,
    ) -> Result<Self, LlmError> {
        let controller = config.controller_backend.build()?;
        let agent = match &config.agent_backend {
            Some(backend) => backend.build()?,
            None => controller.clone(),
        };
        let blast = BlastClient::new(transport.clone(), BlastConfig::default());
        let search_credentials = match (env_nonempty("GOOGLE_CSE_KEY"), env_nonempty("GOOGLE_CSE_ID")) {
            (Some(key), Some(cx)) => Some((key, cx)),
            _ => None,
        };
        Ok(RunResources {
            transport,
            blast,
            prompts,
            controller,
            agent,
            ncbi_api_key: env_nonempty("NCBI_API_KEY"),
            search_credentials,
        })
    }

    pub(crate) fn tool_context(&self) -> ToolContext<'_> {
        ToolContext {
            transport: &self.transport,
            blast: &self.blast,
            prompts: &self.prompts,
            ncbi_api_key: self.ncbi_api_key.as_deref(),
            search_credentials: self
                .search_credentials
                .as_ref()
                .map(|(key, cx)| (key.as_str(), cx.as_str())),
        }
    }
}

/// How an episode ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EpisodeOutcome {
    Answer { answer: FinalAnswer },
    Rejected { text: String },
    Failure { stage: String, message: String },
}

impl EpisodeOutcome {
    pub fn answer_span(&self) -> Option<&str> {
        match self {
            EpisodeOutcome::Answer { answer } => Some(answer.answer_span.as_str()),
            _ => None,
        }
    }

    pub fn is_answer(&self) -> bool {
        matches!(self, EpisodeOutcome::Answer { .. })
    }
}

/// One finished episode: the outcome plus its complete trace and the
/// call counts derived from that trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaResult {
    pub episode_id: String,
    pub question: String,
    pub task: Option<TaskKind>,
    pub outcome: EpisodeOutcome,
    pub latency_ms: u64,
    pub llm_calls: u32,
    pub http_calls: u32,
    pub trace: EpisodeTrace,
}

impl QaResult {
    pub fn validate(&self) -> Result<(), String> {
        self.trace.validate().map_err(|e| e.to_string())?;
        if self.llm_calls != self.trace.llm_calls() {
            return Err(format!(
                "llm_calls {} does not match trace count {}",
                self.llm_calls,
                self.trace.llm_calls()
            ));
        }
        if self.http_calls != self.trace.http_calls() {
            return Err(format!(
                "http_calls {} does not match trace count {}",
                self.http_calls,
                self.trace.http_calls()
            ));
        }
        Ok(())
    }
}

/// Records the terminal trace event for an outcome. Every episode exit
/// path goes through here exactly once.
pub(crate) fn record_termination(recorder: &TraceRecorder, outcome: &EpisodeOutcome) {
    let payload = match outcome {
        EpisodeOutcome::Answer { answer } => serde_json::json!({
            "outcome": "answer",
            "answer_span": answer.answer_span,
            "incomplete_evidence": answer.incomplete_evidence,
        }),
        EpisodeOutcome::Rejected { text } => {
            serde_json::json!({"outcome": "rejected", "text": text})
        }
        EpisodeOutcome::Failure { stage, message } => {
            serde_json::json!({"outcome": "failure", "stage": stage, "message": message})
        }
    };
    recorder.record(EventKind::Termination, payload);
}

/// Packages a finished drive into a QaResult with counts taken from the
/// trace, so the count/trace invariant holds by construction.
pub(crate) fn package_result(
    episode_id: String,
    question: String,
    task: Option<TaskKind>,
    outcome: EpisodeOutcome,
    latency_ms: u64,
    trace: EpisodeTrace,
) -> QaResult {
    QaResult {
        episode_id,
        question,
        task,
        outcome,
        latency_ms,
        llm_calls: trace.llm_calls(),
        http_calls: trace.http_calls(),
        trace,
    }
}

/// Runs one episode in the configured mode.
pub fn run_episode(
    episode_id: &str,
    question: &str,
    task: Option<TaskKind>,
    config: &PipelineConfig,
    resources: &RunResources,
) -> QaResult {
    match config.mode {
        PipelineMode::Monolithic => run_monolithic(episode_id, question, task, config, resources),
        PipelineMode::MultiAgent => run_multi_agent(episode_id, question, task, config, resources),
    }
}
