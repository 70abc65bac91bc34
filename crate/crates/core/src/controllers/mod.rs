//! Controller decisions: the Router picks the next tool agent or rejects
//! the question, the Evaluator decides whether gathered evidence suffices,
//! and the Generator writes the final answer from that evidence.

use crate::agents::{PromptError, PromptLibrary};
use crate::domain::{parse_answer_span, AgentKind, ConversationState, FinalAnswer};
use crate::llm::{
    complete_structured_with, BackendRole, ChatRequest, ContractViolation, EpisodeGateway,
    JsonContract, LlmError, ValueKind,
};
use crate::trace::EventKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ControllerError {
    #[error("{controller} produced no valid decision: {violation}")]
    Contract { controller: &'static str, violation: ContractViolation },
    #[error("generator produced no answer text in {attempts} attempts")]
    EmptyAnswer { attempts: u32 },
    #[error(transparent)]
    Llm(LlmError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

impl ControllerError {
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(self, ControllerError::Llm(LlmError::BudgetExhausted { .. }))
    }
}

fn structured_failure(
    gateway: &EpisodeGateway,
    controller: &'static str,
    err: LlmError,
) -> ControllerError {
    match err {
        LlmError::Contract(violation) => {
            gateway.recorder().record(
                EventKind::ParseFailure,
                serde_json::json!({
                    "context": controller,
                    "attempts": violation.attempts,
                    "violations": violation.last_violations,
                }),
            );
            ControllerError::Contract { controller, violation }
        }
        other => ControllerError::Llm(other),
    }
}

/// Where the router sends the episode next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteTarget {
    Eutils,
    Blast,
    Websearch,
    Reject,
}

impl RouteTarget {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "eutils" => Some(RouteTarget::Eutils),
            "blast" => Some(RouteTarget::Blast),
            "websearch" | "web_search" => Some(RouteTarget::Websearch),
            "reject" => Some(RouteTarget::Reject),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            RouteTarget::Eutils => "eutils",
            RouteTarget::Blast => "blast",
            RouteTarget::Websearch => "websearch",
            RouteTarget::Reject => "reject",
        }
    }

    /// The agent this target dispatches to; rejection dispatches nowhere.
    pub fn agent(&self) -> Option<AgentKind> {
        match self {
            RouteTarget::Eutils => Some(AgentKind::Eutils),
            RouteTarget::Blast => Some(AgentKind::Blast),
            RouteTarget::Websearch => Some(AgentKind::WebSearch),
            RouteTarget::Reject => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub target: RouteTarget,
    /// Present exactly when the target is reject; always rendered from the
    /// fixed rejection template, never model text.
    pub rejection_text: Option<String>,
}

/// Asks the router model where to send the question next. Evaluator
/// feedback from a prior loop iteration is included when present.
pub fn route(
    state: &ConversationState,
    gateway: &EpisodeGateway,
    prompts: &PromptLibrary,
) -> Result<RoutingDecision, ControllerError> {
    let feedback = state.router_feedback.as_deref().unwrap_or("(none)");
    let prompt = prompts.render(
        "controllers/router",
        &[
            ("question", state.question.as_str()),
            ("history", &state.evidence_text()),
            ("feedback", feedback),
        ],
    )?;
    let request = ChatRequest::new(prompts.get("controllers/router_system")?, prompt);
    let contract = JsonContract::new(&[("target", ValueKind::Text)], true);
    let outcome = complete_structured_with(
        |r| gateway.complete(BackendRole::Controller, "router", r),
        &request,
        &contract,
        &|value| {
            let raw = value["target"].as_str().unwrap_or_default();
            RouteTarget::parse(raw)
                .map(|_| ())
                .ok_or_else(|| format!("target {raw:?} is not one of eutils, blast, websearch, reject"))
        },
        gateway.max_repairs(),
    )
    .map_err(|e| structured_failure(gateway, "router", e))?;
    let target = RouteTarget::parse(outcome.value["target"].as_str().unwrap_or_default())
        .expect("validator accepted the value");
    let rejection_text = if target == RouteTarget::Reject {
        Some(prompts.render(
            "controllers/rejection",
            &[("question", state.question.as_str())],
        )?)
    } else {
        None
    };
    Ok(RoutingDecision { target, rejection_text })
}

/// What the evaluator wants next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NextStep {
    Generate,
    RouteAgain,
}

impl NextStep {
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "generate" => Some(NextStep::Generate),
            "route_again" => Some(NextStep::RouteAgain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SufficiencyDecision {
    pub next_step: NextStep,
    pub reason: String,
}

/// Asks the evaluator model whether the gathered evidence answers the
/// question. A route_again verdict stores the reason as router feedback.
pub fn evaluate_sufficiency(
    state: &mut ConversationState,
    gateway: &EpisodeGateway,
    prompts: &PromptLibrary,
) -> Result<SufficiencyDecision, ControllerError> {
    let prompt = prompts.render(
        "controllers/evaluator",
        &[("question", state.question.as_str()), ("history", &state.evidence_text())],
    )?;
    let request = ChatRequest::new(prompts.get("controllers/evaluator_system")?, prompt);
    let contract =
        JsonContract::new(&[("next_step", ValueKind::Text), ("reason", ValueKind::Text)], false);
    let outcome = complete_structured_with(
        |r| gateway.complete(BackendRole::Controller, "evaluator", r),
        &request,
        &contract,
        &|value| {
            let step = value["next_step"].as_str().unwrap_or_default();
            if NextStep::parse(step).is_none() {
                return Err(format!("next_step {step:?} is not generate or route_again"));
            }
            if value["reason"].as_str().unwrap_or_default().trim().is_empty() {
                return Err("reason must not be empty".to_string());
            }
            Ok(())
        },
        gateway.max_repairs(),
    )
    .map_err(|e| structured_failure(gateway, "evaluator", e))?;
    let next_step = NextStep::parse(outcome.value["next_step"].as_str().unwrap_or_default())
        .expect("validator accepted the value");
    let reason = outcome.value["reason"].as_str().unwrap_or_default().trim().to_string();
    if next_step == NextStep::RouteAgain {
        state.router_feedback = Some(reason.clone());
    }
    Ok(SufficiencyDecision { next_step, reason })
}

/// Writes the final answer from the gathered evidence. An empty
/// generation gets one retry; a second empty reply is a structured
/// failure, never a silent empty answer.
pub fn generate_answer(
    state: &ConversationState,
    gateway: &EpisodeGateway,
    prompts: &PromptLibrary,
    forced: bool,
) -> Result<FinalAnswer, ControllerError> {
    let limitation = if forced {
        "Evidence gathering stopped before the evaluator was satisfied. \
         Answer from what is available and state any limitation briefly."
    } else {
        ""
    };
    let prompt = prompts.render(
        "controllers/generator",
        &[
            ("question", state.question.as_str()),
            ("history", &state.evidence_text()),
            ("limitation", limitation),
        ],
    )?;
    let request = ChatRequest::new(prompts.get("controllers/generator_system")?, prompt);
    let mut attempts = 0;
    let text = loop {
        attempts += 1;
        let response = gateway
            .complete(BackendRole::Controller, "generator", &request)
            .map_err(ControllerError::Llm)?;
        let text = response.text.trim().to_string();
        if !text.is_empty() && !parse_answer_span(&text).is_empty() {
            break text;
        }
        if attempts >= 2 {
            gateway.recorder().record(
                EventKind::ParseFailure,
                serde_json::json!({"context": "generator", "attempts": attempts}),
            );
            return Err(ControllerError::EmptyAnswer { attempts });
        }
    };
    let answer_span = parse_answer_span(&text);
    Ok(FinalAnswer {
        text,
        answer_span,
        evidence_refs: (0..state.tool_results.len()).collect(),
        incomplete_evidence: forced,
    })
}
