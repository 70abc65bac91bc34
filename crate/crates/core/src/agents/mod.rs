//! LLM-driven tool agents: Eutils (parameter generation + two-step
//! retrieval), BLAST (sequence extraction + alignment), and Web Search
//! (direct retrieval, no LLM). Each converts a natural-language need into
//! validated API calls and appends ToolResults to the conversation state.

pub mod prompts;

pub use prompts::{PromptError, PromptLibrary};

use crate::domain::{AgentKind, ConversationState, DnaSequence, SequenceError, ToolInvocation, ToolResult};
use crate::llm::{
    complete_structured_with, BackendRole, ChatRequest, ContractViolation, EpisodeGateway,
    JsonContract, LlmError, ValueKind,
};
use crate::trace::EventKind;
use crate::transport::{
    eutils_execute, search_url, web_search, BlastClient, BlastError, EutilsCall, EutilsDb,
    EutilsError, EutilsFunction, Transport, TransportError, WebSearchError,
};
use serde_json::Value;

/// Run-level resources an agent step needs besides the conversation
/// state and the model gateway.
pub struct ToolContext<'a> {
    pub transport: &'a Transport,
    pub blast: &'a BlastClient,
    pub prompts: &'a PromptLibrary,
    pub ncbi_api_key: Option<&'a str>,
    pub search_credentials: Option<(&'a str, &'a str)>,
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("{agent} agent produced no valid parameters: {violation}")]
    Contract { agent: AgentKind, violation: ContractViolation },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Eutils(#[from] EutilsError),
    #[error(transparent)]
    Blast(#[from] BlastError),
    #[error(transparent)]
    WebSearch(#[from] WebSearchError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Llm(LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

impl AgentError {
    /// Budget exhaustion must end the episode rather than be absorbed as
    /// one failed step.
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, AgentError::Llm(LlmError::BudgetExhausted { .. }))
    }
}

/// Maps a structured-output failure to the agent vocabulary, recording
/// the attempts so the failure is classifiable from the trace.
fn structured_failure(
    gateway: &EpisodeGateway,
    agent: AgentKind,
    context: &str,
    err: LlmError,
) -> AgentError {
    match err {
        LlmError::Contract(violation) => {
            gateway.recorder().record(
                EventKind::ParseFailure,
                serde_json::json!({
                    "context": context,
                    "agent": agent,
                    "attempts": violation.attempts,
                    "violations": violation.last_violations,
                }),
            );
            AgentError::Contract { agent, violation }
        }
        other => AgentError::Llm(other),
    }
}

fn record_http(
    gateway: &EpisodeGateway,
    agent: AgentKind,
    url: &str,
    canonical_params: &str,
    latency_ms: u64,
    from_cache: bool,
) {
    gateway.recorder().record(
        EventKind::HttpCall,
        serde_json::json!({
            "agent": agent,
            "url": url,
            "canonical_params": canonical_params,
            "latency_ms": latency_ms,
            "from_cache": from_cache,
        }),
    );
}

/// Episode-level dedup: a request whose canonical parameters already ran
/// this episode is answered from the existing ToolResult with no HTTP.
fn cached_result(state: &ConversationState, agent: AgentKind, canonical: &str) -> Option<ToolResult> {
    state
        .tool_results
        .iter()
        .find(|r| r.invocation.agent == agent && r.invocation.canonical_params == canonical)
        .map(|prior| {
            let mut result = prior.clone();
            result.from_cache = true;
            result.latency_ms = 0;
            result
        })
}

fn parse_ids(value: Option<&Value>) -> Vec<String> {
    match value {
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(|item| match item {
                Value::String(s) if !s.trim().is_empty() => Some(s.trim().to_string()),
                Value::Number(n) => Some(n.to_string()),
                _ => None,
            })
            .collect(),
        Some(Value::String(joined)) => joined
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect(),
        Some(Value::Number(n)) => vec![n.to_string()],
        _ => Vec::new(),
    }
}

/// Builds a validated EutilsCall from a model reply. The model controls
/// function, db, term/ids and retmax; the normalisation defaults are
/// injected later and never model-controlled.
fn eutils_call_from_value(value: &Value) -> Result<EutilsCall, String> {
    let function = value
        .get("function")
        .and_then(Value::as_str)
        .and_then(EutilsFunction::parse)
        .ok_or_else(|| "field \"function\" must be esearch, efetch or esummary".to_string())?;
    let db = value
        .get("db")
        .and_then(Value::as_str)
        .map(EutilsDb::parse)
        .filter(|db| !db.as_str().is_empty())
        .ok_or_else(|| "field \"db\" must name a database".to_string())?;
    let term = value.get("term").and_then(Value::as_str).map(str::to_string);
    let ids = parse_ids(value.get("ids"));
    let retmax = value.get("retmax").and_then(Value::as_u64).and_then(|n| u32::try_from(n).ok());
    let call = EutilsCall { function, db, term, ids, retmax };
    call.validate().map_err(|e| e.to_string())?;
    Ok(call)
}

fn eutils_contract() -> JsonContract {
    JsonContract::new(&[("function", ValueKind::Text), ("db", ValueKind::Text)], true)
}

/// Executes one E-utilities call with episode dedup, records the HTTP
/// event, and appends the result to the state.
fn run_eutils_call(
    state: &mut ConversationState,
    gateway: &EpisodeGateway,
    ctx: &ToolContext,
    call: &EutilsCall,
) -> Result<ToolResult, AgentError> {
    let canonical = call.canonical_params();
    if let Some(cached) = cached_result(state, AgentKind::Eutils, &canonical) {
        record_http(gateway, AgentKind::Eutils, &cached.invocation.url, &canonical, 0, true);
        state.push_tool_result(cached.clone());
        return Ok(cached);
    }
    let result = match eutils_execute(ctx.transport, call, ctx.ncbi_api_key)? {
        Ok(result) => result,
        Err(transport_err) => return Err(AgentError::Transport(transport_err)),
    };
    record_http(
        gateway,
        AgentKind::Eutils,
        &result.invocation.url,
        &canonical,
        result.latency_ms,
        false,
    );
    state.push_tool_result(result.clone());
    Ok(result)
}

/// One Eutils agent step: the model emits a parameter object, the call
/// runs with defaults injected, and on a first-step esearch the returned
/// ids are offered straight back for one chained efetch/esummary.
pub fn eutils_agent_step(
    state: &mut ConversationState,
    gateway: &EpisodeGateway,
    ctx: &ToolContext,
) -> Result<ToolResult, AgentError> {
    let first_eutils_step =
        !state.tool_results.iter().any(|r| r.invocation.agent == AgentKind::Eutils);
    let prompt = ctx.prompts.render(
        "agents/eutils",
        &[("question", state.question.as_str()), ("history", &state.evidence_text())],
    )?;
    let request = ChatRequest::new(ctx.prompts.get("agents/eutils_system")?, prompt);
    let outcome = complete_structured_with(
        |r| gateway.complete(BackendRole::Agent, "eutils_agent", r),
        &request,
        &eutils_contract(),
        &|value| eutils_call_from_value(value).map(|_| ()),
        gateway.max_repairs(),
    )
    .map_err(|e| structured_failure(gateway, AgentKind::Eutils, "eutils_agent", e))?;
    let call = eutils_call_from_value(&outcome.value).expect("validator accepted the value");
    let result = run_eutils_call(state, gateway, ctx, &call)?;

    if !(first_eutils_step && call.function == EutilsFunction::ESearch) {
        return Ok(result);
    }
    let ids: Vec<String> = result.parsed["esearchresult"]["idlist"]
        .as_array()
        .map(|items| {
            items
                .iter()
                .filter_map(|v| match v {
                    Value::String(s) => Some(s.clone()),
                    Value::Number(n) => Some(n.to_string()),
                    _ => None,
                })
                .collect()
        })
        .unwrap_or_default();
    if ids.is_empty() {
        return Ok(result);
    }
    let follow_prompt = ctx.prompts.render(
        "agents/eutils_followup",
        &[
            ("question", state.question.as_str()),
            ("db", call.db.as_str()),
            ("ids", &ids.join(", ")),
        ],
    )?;
    let follow_request = ChatRequest::new(ctx.prompts.get("agents/eutils_system")?, follow_prompt);
    let follow_outcome = complete_structured_with(
        |r| gateway.complete(BackendRole::Agent, "eutils_agent_followup", r),
        &follow_request,
        &eutils_contract(),
        &|value| match eutils_call_from_value(value) {
            Ok(call) if call.function == EutilsFunction::ESearch => {
                Err("follow-up must be efetch or esummary, not another search".to_string())
            }
            Ok(_) => Ok(()),
            Err(problem) => Err(problem),
        },
        gateway.max_repairs(),
    )
    .map_err(|e| structured_failure(gateway, AgentKind::Eutils, "eutils_agent_followup", e))?;
    let follow_call =
        eutils_call_from_value(&follow_outcome.value).expect("validator accepted the value");
    run_eutils_call(state, gateway, ctx, &follow_call)
}

/// Asks the model for the DNA sequence embedded in the question. Only a
/// strict `{"sequence": ...}` object is accepted, and the value must
/// survive alphabet and length validation.
pub fn extract_sequence(
    state: &ConversationState,
    gateway: &EpisodeGateway,
    ctx: &ToolContext,
) -> Result<DnaSequence, AgentError> {
    let prompt = ctx.prompts.render(
        "agents/blast",
        &[("question", state.question.as_str()), ("history", &state.evidence_text())],
    )?;
    let request = ChatRequest::new(ctx.prompts.get("agents/blast_system")?, prompt);
    let contract = JsonContract::new(&[("sequence", ValueKind::Text)], false);
    let outcome = complete_structured_with(
        |r| gateway.complete(BackendRole::Agent, "blast_extract", r),
        &request,
        &contract,
        &|value| {
            let raw = value["sequence"].as_str().unwrap_or_default();
            DnaSequence::parse(raw).map(|_| ()).map_err(|e| e.to_string())
        },
        gateway.max_repairs(),
    )
    .map_err(|e| structured_failure(gateway, AgentKind::Blast, "blast_extract", e))?;
    let raw = outcome.value["sequence"].as_str().unwrap_or_default();
    Ok(DnaSequence::parse(raw)?)
}

/// One BLAST agent step: extract the sequence, align it (submit + polls
/// on the clock schedule), and append the truncated report.
pub fn blast_agent_step(
    state: &mut ConversationState,
    gateway: &EpisodeGateway,
    ctx: &ToolContext,
) -> Result<ToolResult, AgentError> {
    let sequence = extract_sequence(state, gateway, ctx)?;
    let (url, canonical) = BlastClient::submit_url(&sequence);
    if let Some(cached) = cached_result(state, AgentKind::Blast, &canonical) {
        record_http(gateway, AgentKind::Blast, &url, &canonical, 0, true);
        state.push_tool_result(cached.clone());
        return Ok(cached);
    }
    let report = ctx.blast.align_observed(&sequence, |op, op_url, from_cache| {
        gateway.recorder().record(
            EventKind::HttpCall,
            serde_json::json!({
                "agent": AgentKind::Blast,
                "op": op,
                "url": op_url,
                "canonical_params": canonical,
                "from_cache": from_cache,
            }),
        );
    })?;
    let result = ToolResult {
        invocation: ToolInvocation {
            agent: AgentKind::Blast,
            method: "GET".to_string(),
            url,
            canonical_params: canonical,
        },
        raw_response: report.report.clone(),
        parsed: serde_json::json!({"rid": report.rid, "polls": report.polls}),
        latency_ms: report.latency_ms,
        from_cache: report.from_cache,
    };
    state.push_tool_result(result.clone());
    Ok(result)
}

/// One web-search step: the user question goes out verbatim, the top
/// hits come back as the ToolResult. No model call is involved.
pub fn web_search_agent_step(
    state: &mut ConversationState,
    gateway: &EpisodeGateway,
    ctx: &ToolContext,
) -> Result<ToolResult, AgentError> {
    let question = state.question.clone();
    let (url, canonical) = search_url(&question);
    if let Some(cached) = cached_result(state, AgentKind::WebSearch, &canonical) {
        record_http(gateway, AgentKind::WebSearch, &url, &canonical, 0, true);
        state.push_tool_result(cached.clone());
        return Ok(cached);
    }
    let (hits, mut result) = web_search(ctx.transport, &question, ctx.search_credentials)?;
    result.parsed = serde_json::json!({ "hits": hits });
    record_http(
        gateway,
        AgentKind::WebSearch,
        &result.invocation.url,
        &canonical,
        result.latency_ms,
        false,
    );
    state.push_tool_result(result.clone());
    Ok(result)
}
