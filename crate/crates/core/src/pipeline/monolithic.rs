//! Single-model drive loop: the model writes NCBI URLs in square brackets,
//! the loop executes them and feeds the response body back into the context,
//! until the model emits an answer line.

use std::time::Duration;

use serde_json::{json, Value};

use crate::domain::{
    canonicalize_params, parse_answer_span, AgentKind, FinalAnswer, TaskKind, ToolInvocation,
    ToolResult, ANSWER_MARKER,
};
use crate::llm::{BackendRole, ChatRequest, EpisodeGateway, LlmError};
use crate::trace::{EventKind, TraceRecorder};
use crate::transport::{HttpRequestSpec, EUTILS_BASE};

use super::{
    build_prompt, package_result, record_termination, EpisodeOutcome, PipelineConfig, QaResult,
    RunResources,
};

/// Pause before a BLAST result retrieval, mirroring the interactive loop's
/// wait for the job to leave the queue.
const BLAST_GET_PAUSE: Duration = Duration::from_secs(10);

/// Two malformed bracket calls (or failed requests) in a row end the episode;
/// a single one is fed back so the model can correct itself.
const MAX_CONSECUTIVE_FAILURES: u32 = 2;

pub fn run_monolithic(
    episode_id: &str,
    question: &str,
    task: Option<TaskKind>,
    config: &PipelineConfig,
    resources: &RunResources,
) -> QaResult {
    let clock = resources.transport.clock_arc();
    let recorder = TraceRecorder::new(episode_id, clock.clone());
    let started = clock.now();
    let outcome = {
        let gateway = EpisodeGateway::single(
            resources.controller.as_ref(),
            &recorder,
            config.max_llm_calls,
        );
        drive(question, task, config, resources, &gateway, &recorder)
    };
    let latency_ms = (clock.now() - started).num_milliseconds().max(0) as u64;
    package_result(
        episode_id.to_string(),
        question.to_string(),
        task,
        outcome,
        latency_ms,
        recorder.finish(),
    )
}

fn drive(
    question: &str,
    task: Option<TaskKind>,
    config: &PipelineConfig,
    resources: &RunResources,
    gateway: &EpisodeGateway<'_>,
    recorder: &TraceRecorder,
) -> EpisodeOutcome {
    let clock = resources.transport.clock();
    let base = match build_prompt(&resources.prompts, &config.profile, question, task) {
        Ok(request) => request,
        Err(err) => return fail(recorder, "prompt", err.to_string()),
    };
    let system = base.system_prompt;
    let mut context = base.messages[0].content.clone();
    context.push('\n');

    let mut tool_results: Vec<ToolResult> = Vec::new();
    // Dedup key (canonical URL) alongside the index of the result it produced.
    let mut seen: Vec<(String, usize)> = Vec::new();
    let mut consecutive_failures = 0u32;

    loop {
        let request = ChatRequest::new(system.clone(), context.clone()).with_stop(&["["]);
        let response = match gateway.complete(BackendRole::Controller, "monolithic", &request) {
            Ok(response) => response,
            Err(err) => return llm_failure(recorder, err),
        };

        if response.matched_stop.is_none() {
            if response.text.contains(ANSWER_MARKER) {
                let answer = FinalAnswer {
                    text: response.text.trim().to_string(),
                    answer_span: parse_answer_span(&response.text),
                    evidence_refs: (0..tool_results.len()).collect(),
                    incomplete_evidence: false,
                };
                let outcome = EpisodeOutcome::Answer { answer };
                record_termination(recorder, &outcome);
                return outcome;
            }
            // Finished a thought without calling anything or answering; keep
            // the text and let the model continue.
            context.push_str(&response.text);
            context.push('\n');
            continue;
        }

        // Generation stopped at "[". Read the URL out of the tail when the
        // truncation happened client-side; otherwise ask the model to finish
        // the bracket expression.
        let tail = response.truncated_tail.clone().unwrap_or_default();
        let url_text = match tail.find(']') {
            Some(close) => tail[..close].to_string(),
            None => {
                let cont = ChatRequest::new(
                    system.clone(),
                    format!("{context}{}[", response.text),
                )
                .with_stop(&["]"]);
                match gateway.complete(BackendRole::Controller, "monolithic_url", &cont) {
                    Ok(cont_response) => cont_response.text,
                    Err(err) => return llm_failure(recorder, err),
                }
            }
        };

        let url = url_text.trim().to_string();
        if !url.starts_with("http") {
            recorder.record(
                EventKind::ParseFailure,
                json!({"context": "monolithic_bracket", "text": url_text}),
            );
            consecutive_failures += 1;
            if consecutive_failures >= MAX_CONSECUTIVE_FAILURES {
                return fail(
                    recorder,
                    "bracket_parse",
                    format!("{consecutive_failures} consecutive malformed bracket calls"),
                );
            }
            context.push_str(&format!("{}[{}]\n", response.text, url_text));
            continue;
        }

        let (key, canonical) = canonical_url(&url);
        let agent = classify_url(&url);

        if let Some(&(_, index)) = seen.iter().find(|(k, _)| *k == key) {
            // Same call as earlier in the episode; reuse the body without
            // touching the network.
            let body = tool_results[index].raw_response.clone();
            recorder.record(
                EventKind::HttpCall,
                json!({
                    "agent": agent,
                    "url": url,
                    "canonical_params": canonical,
                    "latency_ms": 0,
                    "from_cache": true,
                }),
            );
            context.push_str(&format!("{}[{}]\n{}\n", response.text, url, body));
            consecutive_failures = 0;
            continue;
        }

        if agent == AgentKind::Blast && url.contains("CMD=Get") {
            clock.sleep(BLAST_GET_PAUSE);
        }

        let mut spec = HttpRequestSpec::get(url.clone());
        if url.starts_with(EUTILS_BASE) {
            if let Some(api_key) = &resources.ncbi_api_key {
                spec.secret_params.push(("api_key".to_string(), api_key.clone()));
            }
        }

        let fetch_started = clock.now();
        let http = match resources.transport.execute(&spec) {
            Ok(http) => http,
            Err(err) => {
                recorder.record(
                    EventKind::ParseFailure,
                    json!({"context": "monolithic_http", "url": url, "error": err.to_string()}),
                );
                consecutive_failures += 1;
                if consecutive_failures >= MAX_CONSECUTIVE_FAILURES {
                    return fail(recorder, "transport", err.to_string());
                }
                context.push_str(&format!(
                    "{}[{}]\n(request failed: {})\n",
                    response.text, url, err
                ));
                continue;
            }
        };
        let latency_ms = (clock.now() - fetch_started).num_milliseconds().max(0) as u64;
        let body = http.text_capped(resources.transport.byte_cap());
        let parsed = serde_json::from_str(&body).unwrap_or(Value::Null);
        recorder.record(
            EventKind::HttpCall,
            json!({
                "agent": agent,
                "url": url,
                "canonical_params": canonical,
                "latency_ms": latency_ms,
                "from_cache": false,
                "status": http.status,
            }),
        );
        seen.push((key, tool_results.len()));
        tool_results.push(ToolResult {
            invocation: ToolInvocation {
                agent,
                method: "GET".to_string(),
                url: url.clone(),
                canonical_params: canonical,
            },
            raw_response: body.clone(),
            parsed,
            latency_ms,
            from_cache: false,
        });
        context.push_str(&format!("{}[{}]\n{}\n", response.text, url, body));
        consecutive_failures = 0;
    }
}

fn llm_failure(recorder: &TraceRecorder, err: LlmError) -> EpisodeOutcome {
    let stage = if matches!(err, LlmError::BudgetExhausted { .. }) {
        "llm_budget"
    } else {
        "llm"
    };
    fail(recorder, stage, err.to_string())
}

fn fail(
    recorder: &TraceRecorder,
    stage: impl Into<String>,
    message: impl Into<String>,
) -> EpisodeOutcome {
    let outcome = EpisodeOutcome::Failure { stage: stage.into(), message: message.into() };
    record_termination(recorder, &outcome);
    outcome
}

/// Canonical form of a model-written URL: scheme, host, path, and the query
/// sorted by key. Used only to recognise repeats within an episode.
fn canonical_url(url: &str) -> (String, String) {
    match url::Url::parse(url) {
        Ok(parsed) => {
            let params: Vec<(String, String)> = parsed
                .query_pairs()
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect();
            let canonical = canonicalize_params(&params);
            let port = parsed.port().map(|p| format!(":{p}")).unwrap_or_default();
            let base = format!(
                "{}://{}{}{}",
                parsed.scheme(),
                parsed.host_str().unwrap_or(""),
                port,
                parsed.path()
            );
            (format!("{base}?{canonical}"), canonical)
        }
        Err(_) => (url.to_string(), String::new()),
    }
}

fn classify_url(url: &str) -> AgentKind {
    if url.contains("Blast.cgi") {
        AgentKind::Blast
    } else if url.contains("customsearch") {
        AgentKind::WebSearch
    } else {
        AgentKind::Eutils
    }
}
