//! Chat backends: deterministic scripted playback and remote HTTP.

use crate::llm::{ChatRequest, ChatResponse, ChatRole, FinishReason, LlmError, TokenUsage};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

/// A source of raw completions. Stop sequences are applied by [`complete`],
/// not by implementations, so scripted and remote backends truncate
/// identically.
pub trait ChatBackend: Send + Sync {
    fn generate(&self, req: &ChatRequest) -> Result<RawCompletion, LlmError>;
    fn name(&self) -> String;
}

#[derive(Debug, Clone)]
pub struct RawCompletion {
    pub text: String,
    pub finish_reason: FinishReason,
    pub token_usage: Option<TokenUsage>,
}

/// Runs one completion and applies stop-sequence truncation: the returned
/// text never contains a stop sequence, the matched stop is recorded, and
/// whatever the backend produced past the match is kept as the tail.
pub fn complete(backend: &dyn ChatBackend, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
    req.validate()?;
    let raw = backend.generate(req)?;
    let earliest = req
        .stop_sequences
        .iter()
        .filter_map(|stop| raw.text.find(stop.as_str()).map(|at| (at, stop.clone())))
        .min_by_key(|(at, _)| *at);
    Ok(match earliest {
        Some((at, stop)) => ChatResponse {
            text: raw.text[..at].to_string(),
            truncated_tail: Some(raw.text[at + stop.len()..].to_string()),
            matched_stop: Some(stop),
            finish_reason: FinishReason::StopSequence,
            token_usage: raw.token_usage,
        },
        None => ChatResponse {
            text: raw.text,
            finish_reason: raw.finish_reason,
            matched_stop: None,
            truncated_tail: None,
            token_usage: raw.token_usage,
        },
    })
}

/// Plays back a fixed list of responses in order. Exhaustion is a loud
/// error unless the script is marked as looping (steady-state benchmark
/// scripts).
pub struct ScriptedBackend {
    script: Vec<String>,
    looped: bool,
    cursor: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(script: Vec<String>) -> Self {
        ScriptedBackend { script, looped: false, cursor: AtomicUsize::new(0) }
    }

    pub fn looping(script: Vec<String>) -> Self {
        ScriptedBackend { script, looped: true, cursor: AtomicUsize::new(0) }
    }

    pub fn calls_made(&self) -> usize {
        self.cursor.load(Ordering::SeqCst)
    }
}

impl ChatBackend for ScriptedBackend {
    fn generate(&self, _req: &ChatRequest) -> Result<RawCompletion, LlmError> {
        let idx = self.cursor.fetch_add(1, Ordering::SeqCst);
        let entry = if self.looped && !self.script.is_empty() {
            &self.script[idx % self.script.len()]
        } else {
            self.script
                .get(idx)
                .ok_or(LlmError::ScriptExhausted { calls_made: idx })?
        };
        Ok(RawCompletion {
            text: entry.clone(),
            finish_reason: FinishReason::Stop,
            token_usage: None,
        })
    }

    fn name(&self) -> String {
        format!("scripted({} entries{})", self.script.len(), if self.looped { ", looping" } else { "" })
    }
}

/// One-shot chat-completion POST against an OpenAI-style endpoint.
pub struct RemoteHttpBackend {
    endpoint: String,
    model_name: String,
    headers: Vec<(String, String)>,
    response_text_path: String,
    agent: ureq::Agent,
}

const DEFAULT_RESPONSE_TEXT_PATH: &str = "/choices/0/message/content";

impl RemoteHttpBackend {
    pub fn new(
        endpoint: String,
        model_name: String,
        timeout: Duration,
        headers: Vec<(String, String)>,
        response_text_path: Option<String>,
    ) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        RemoteHttpBackend {
            endpoint,
            model_name,
            headers,
            response_text_path: response_text_path
                .unwrap_or_else(|| DEFAULT_RESPONSE_TEXT_PATH.to_string()),
            agent,
        }
    }

    fn request_body(&self, req: &ChatRequest) -> serde_json::Value {
        let mut messages = Vec::new();
        if !req.system_prompt.is_empty() {
            messages.push(serde_json::json!({"role": "system", "content": req.system_prompt}));
        }
        for message in &req.messages {
            let role = match message.role {
                ChatRole::User => "user",
                ChatRole::Assistant => "assistant",
            };
            messages.push(serde_json::json!({"role": role, "content": message.content}));
        }
        let mut body = serde_json::json!({
            "model": self.model_name,
            "messages": messages,
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        if !req.stop_sequences.is_empty() {
            body["stop"] = serde_json::json!(req.stop_sequences);
        }
        body
    }
}

impl ChatBackend for RemoteHttpBackend {
    fn generate(&self, req: &ChatRequest) -> Result<RawCompletion, LlmError> {
        let mut request = self.agent.post(&self.endpoint);
        for (name, value) in &self.headers {
            request = request.header(name, value);
        }
        let mut response = request
            .send_json(self.request_body(req))
            .map_err(|err| LlmError::Transport {
                message: err.to_string(),
                retryable: true,
            })?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|err| LlmError::Transport { message: err.to_string(), retryable: true })?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Backend {
                status,
                body_excerpt: body.chars().take(400).collect(),
            });
        }
        let parsed: serde_json::Value = serde_json::from_str(&body).map_err(|err| {
            LlmError::Backend { status, body_excerpt: format!("unparseable body: {err}") }
        })?;
        let text = parsed
            .pointer(&self.response_text_path)
            .and_then(|v| v.as_str())
            .ok_or_else(|| LlmError::Backend {
                status,
                body_excerpt: format!(
                    "no text at {} in: {}",
                    self.response_text_path,
                    body.chars().take(400).collect::<String>()
                ),
            })?
            .to_string();
        let finish_reason = match parsed.pointer("/choices/0/finish_reason").and_then(|v| v.as_str())
        {
            Some("length") => FinishReason::Length,
            Some("stop") | None => FinishReason::Stop,
            Some(_) => FinishReason::Stop,
        };
        let token_usage = match (
            parsed.pointer("/usage/prompt_tokens").and_then(|v| v.as_u64()),
            parsed.pointer("/usage/completion_tokens").and_then(|v| v.as_u64()),
        ) {
            (Some(prompt), Some(completion)) => Some(TokenUsage {
                prompt: prompt as u32,
                completion: completion as u32,
            }),
            _ => None,
        };
        Ok(RawCompletion { text, finish_reason, token_usage })
    }

    fn name(&self) -> String {
        format!("remote({}, {})", self.endpoint, self.model_name)
    }
}

/// Serializable backend description used in manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendConfig {
    RemoteHttp {
        #[serde(default)]
        endpoint: String,
        model_name: String,
        #[serde(default = "default_timeout_ms")]
        request_timeout_ms: u64,
        /// Header values may reference environment variables as `${NAME}`;
        /// secrets stay out of manifests.
        #[serde(default)]
        headers: BTreeMap<String, String>,
        #[serde(default)]
        response_text_path: Option<String>,
    },
    Scripted {
        script: Vec<String>,
        #[serde(default)]
        loop_script: bool,
    },
}

fn default_timeout_ms() -> u64 {
    60_000
}

impl BackendConfig {
    pub fn scripted(entries: &[&str]) -> Self {
        BackendConfig::Scripted {
            script: entries.iter().map(|s| s.to_string()).collect(),
            loop_script: false,
        }
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self, BackendConfig::Scripted { .. })
    }

    /// Instantiates the backend, resolving environment overrides
    /// (`LLM_ENDPOINT`) and `${VAR}` header interpolations.
    pub fn build(&self) -> Result<Arc<dyn ChatBackend>, LlmError> {
        match self {
            BackendConfig::Scripted { script, loop_script } => {
                if script.is_empty() && !loop_script {
                    return Err(LlmError::Config("scripted backend with empty script".to_string()));
                }
                Ok(if *loop_script {
                    Arc::new(ScriptedBackend::looping(script.clone()))
                } else {
                    Arc::new(ScriptedBackend::new(script.clone()))
                })
            }
            BackendConfig::RemoteHttp {
                endpoint,
                model_name,
                request_timeout_ms,
                headers,
                response_text_path,
            } => {
                let endpoint = match std::env::var("LLM_ENDPOINT") {
                    Ok(v) if !v.is_empty() => v,
                    _ => endpoint.clone(),
                };
                if endpoint.is_empty() {
                    return Err(LlmError::Config(
                        "remote backend needs an endpoint (manifest or LLM_ENDPOINT)".to_string(),
                    ));
                }
                let mut resolved = Vec::new();
                for (name, value) in headers {
                    resolved.push((name.clone(), interpolate_env(value)?));
                }
                if resolved.is_empty() {
                    if let Ok(key) = std::env::var("LLM_API_KEY") {
                        if !key.is_empty() {
                            resolved.push(("authorization".to_string(), format!("Bearer {key}")));
                        }
                    }
                }
                Ok(Arc::new(RemoteHttpBackend::new(
                    endpoint,
                    model_name.clone(),
                    Duration::from_millis(*request_timeout_ms),
                    resolved,
                    response_text_path.clone(),
                )))
            }
        }
    }
}

/// Replaces `${NAME}` references with environment values; an unset
/// variable is a configuration error, never an empty substitution.
fn interpolate_env(value: &str) -> Result<String, LlmError> {
    let mut out = String::new();
    let mut rest = value;
    while let Some(at) = rest.find("${") {
        out.push_str(&rest[..at]);
        let after = &rest[at + 2..];
        let close = after.find('}').ok_or_else(|| {
            LlmError::Config(format!("unterminated ${{...}} in header value {value:?}"))
        })?;
        let name = &after[..close];
        let resolved = std::env::var(name).map_err(|_| {
            LlmError::Config(format!("environment variable {name} is not set"))
        })?;
        out.push_str(&resolved);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}
