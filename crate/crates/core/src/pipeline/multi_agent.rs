//! Modular drive loop: a router picks a tool agent, an evaluator decides
//! whether the gathered evidence suffices, and a generator writes the final
//! answer. Each role runs against its own backend.

use serde_json::json;

use crate::agents::{blast_agent_step, eutils_agent_step, web_search_agent_step};
use crate::controllers::{
    evaluate_sufficiency, generate_answer, route, ControllerError, NextStep, RouteTarget,
};
use crate::domain::{AgentKind, ConversationState, TaskKind};
use crate::llm::EpisodeGateway;
use crate::trace::{EventKind, TraceRecorder};

use super::{
    package_result, record_termination, EpisodeOutcome, PipelineConfig, QaResult, RunResources,
};

pub fn run_multi_agent(
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
        let gateway = EpisodeGateway::new(
            resources.controller.as_ref(),
            resources.agent.as_ref(),
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
    let ctx = resources.tool_context();
    let prompts = &resources.prompts;
    let mut state = ConversationState::new(question, task);
    let mut agent_steps = 0u32;

    loop {
        if agent_steps >= config.max_agent_steps {
            // Out of tool budget; answer from whatever was gathered.
            recorder.record(
                EventKind::Decision,
                json!({"stage": "forced_generation", "agent_steps": agent_steps}),
            );
            return finish_generate(&mut state, gateway, resources, recorder, true);
        }

        let decision = match route(&state, gateway, prompts) {
            Ok(decision) => decision,
            Err(err) => return controller_failure(recorder, "router", err),
        };
        state.step_count += 1;
        recorder.record(
            EventKind::Decision,
            json!({"stage": "route", "target": decision.target.as_str()}),
        );

        if decision.target == RouteTarget::Reject {
            state.terminated = true;
            let outcome = EpisodeOutcome::Rejected {
                text: decision.rejection_text.unwrap_or_default(),
            };
            record_termination(recorder, &outcome);
            return outcome;
        }

        let agent_kind = decision
            .target
            .agent()
            .expect("non-reject targets map to an agent");
        let step = match agent_kind {
            AgentKind::Eutils => eutils_agent_step(&mut state, gateway, &ctx),
            AgentKind::Blast => blast_agent_step(&mut state, gateway, &ctx),
            AgentKind::WebSearch => web_search_agent_step(&mut state, gateway, &ctx),
        };
        agent_steps += 1;
        match step {
            Ok(result) => recorder.record(
                EventKind::Decision,
                json!({
                    "stage": "agent_outcome",
                    "agent": agent_kind,
                    "ok": true,
                    "from_cache": result.from_cache,
                }),
            ),
            Err(err) if err.is_budget_exhausted() => {
                return fail(recorder, "llm_budget", err.to_string(), &mut state)
            }
            // A failed step is not fatal: the evaluator sees the unchanged
            // evidence and can re-route or settle for what exists.
            Err(err) => recorder.record(
                EventKind::Decision,
                json!({
                    "stage": "agent_outcome",
                    "agent": agent_kind,
                    "ok": false,
                    "error": err.to_string(),
                }),
            ),
        }

        let sufficiency = match evaluate_sufficiency(&mut state, gateway, prompts) {
            Ok(sufficiency) => sufficiency,
            Err(err) => return controller_failure(recorder, "evaluator", err),
        };
        state.step_count += 1;
        recorder.record(
            EventKind::Decision,
            json!({
                "stage": "evaluate",
                "next_step": sufficiency.next_step,
                "reason": sufficiency.reason,
            }),
        );
        match sufficiency.next_step {
            NextStep::Generate => {
                return finish_generate(&mut state, gateway, resources, recorder, false)
            }
            // The evaluator stored its reason as router feedback.
            NextStep::RouteAgain => continue,
        }
    }
}

fn finish_generate(
    state: &mut ConversationState,
    gateway: &EpisodeGateway<'_>,
    resources: &RunResources,
    recorder: &TraceRecorder,
    forced: bool,
) -> EpisodeOutcome {
    match generate_answer(state, gateway, &resources.prompts, forced) {
        Ok(answer) => {
            state.terminated = true;
            let outcome = EpisodeOutcome::Answer { answer };
            record_termination(recorder, &outcome);
            outcome
        }
        Err(err) => controller_failure(recorder, "generator", err),
    }
}

fn controller_failure(
    recorder: &TraceRecorder,
    stage: &'static str,
    err: ControllerError,
) -> EpisodeOutcome {
    let stage = if err.is_budget_exhausted() { "llm_budget" } else { stage };
    let outcome = EpisodeOutcome::Failure { stage: stage.to_string(), message: err.to_string() };
    record_termination(recorder, &outcome);
    outcome
}

fn fail(
    recorder: &TraceRecorder,
    stage: &str,
    message: String,
    state: &mut ConversationState,
) -> EpisodeOutcome {
    state.terminated = true;
    let outcome = EpisodeOutcome::Failure { stage: stage.to_string(), message };
    record_termination(recorder, &outcome);
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::PromptLibrary;
    use crate::clock::FakeClock;
    use crate::llm::BackendConfig;
    use crate::pipeline::{PipelineMode, PromptProfile, DEFAULT_MAX_AGENT_STEPS};
    use crate::transport::{build_eutils_url, FixtureStore, Transport, TransportConfig};
    use crate::transport::{EutilsCall, EutilsDb};
    use std::sync::Arc;

    fn prompts() -> PromptLibrary {
        PromptLibrary::from_entries(&[
            ("controllers/router_system", "You route questions to tools."),
            (
                "controllers/router",
                "Question: {question}\nEvidence:\n{history}\nFeedback: {feedback}",
            ),
            ("controllers/evaluator_system", "You judge evidence sufficiency."),
            ("controllers/evaluator", "Question: {question}\nEvidence:\n{history}"),
            ("controllers/generator_system", "You write the final answer."),
            (
                "controllers/generator",
                "Question: {question}\nEvidence:\n{history}\n{limitation}",
            ),
            (
                "controllers/rejection",
                "This system answers genomics questions only, so \"{question}\" is out of scope.",
            ),
            ("agents/eutils_system", "You write E-utilities parameter objects."),
            ("agents/eutils", "Question: {question}\nEvidence so far:\n{history}"),
            (
                "agents/eutils_followup",
                "Question: {question}\nSearch of {db} returned ids: {ids}\nEmit the follow-up fetch.",
            ),
            ("agents/blast_system", "You extract DNA sequences."),
            ("agents/blast", "Question: {question}\nEvidence so far:\n{history}"),
        ])
    }

    struct Setup {
        _dir: tempfile::TempDir,
        config: PipelineConfig,
        resources: RunResources,
        clock: Arc<FakeClock>,
    }

    impl Setup {
        fn new(script: &[&str], populate: impl FnOnce(&FixtureStore)) -> Self {
            let dir = tempfile::tempdir().unwrap();
            populate(&FixtureStore::new(dir.path()));
            let clock = Arc::new(FakeClock::new());
            let transport = Arc::new(
                Transport::new(TransportConfig::replay(dir.path()), clock.clone()).unwrap(),
            );
            let config = PipelineConfig {
                mode: PipelineMode::MultiAgent,
                controller_backend: BackendConfig::scripted(script),
                agent_backend: None,
                max_agent_steps: DEFAULT_MAX_AGENT_STEPS,
                max_llm_calls: 20,
                profile: PromptProfile::full(),
            };
            let resources = RunResources::build(&config, transport, prompts()).unwrap();
            Setup { _dir: dir, config, resources, clock }
        }

        fn run(&self, question: &str) -> QaResult {
            run_multi_agent("ep-1", question, None, &self.config, &self.resources)
        }
    }

    fn stages(result: &QaResult) -> Vec<String> {
        result
            .trace
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Decision)
            .map(|e| e.payload["stage"].as_str().unwrap_or_default().to_string())
            .collect()
    }

    fn esearch_lmp10_url() -> String {
        build_eutils_url(&EutilsCall::search(EutilsDb::Gene, "LMP10"))
    }

    fn efetch_5699_url() -> String {
        build_eutils_url(&EutilsCall::fetch(EutilsDb::Gene, vec!["5699".to_string()]))
    }

    #[test]
    fn route_gather_evaluate_generate_is_the_shortest_tool_path() {
        let setup = Setup::new(
            &[
                r#"{"target": "eutils"}"#,
                r#"{"function": "esearch", "db": "gene", "term": "LMP10"}"#,
                r#"{"function": "efetch", "db": "gene", "ids": ["5699"]}"#,
                r#"{"next_step": "generate", "reason": "the symbol is in the record"}"#,
                "The official symbol is PSMB10.\nAnswer: PSMB10",
            ],
            |store| {
                store
                    .store(
                        "GET",
                        &esearch_lmp10_url(),
                        1,
                        200,
                        Some("application/json"),
                        br#"{"esearchresult":{"idlist":["5699"]}}"#,
                        "t",
                    )
                    .unwrap();
                store
                    .store(
                        "GET",
                        &efetch_5699_url(),
                        1,
                        200,
                        Some("text/plain"),
                        b"1. Official Symbol: PSMB10. Also known as LMP10.",
                        "t",
                    )
                    .unwrap();
            },
        );
        let result = setup.run("What is the official gene symbol of LMP10?");
        result.validate().unwrap();
        assert_eq!(result.outcome.answer_span(), Some("PSMB10"));
        assert_eq!(result.llm_calls, 5);
        assert_eq!(result.http_calls, 2);
        assert_eq!(stages(&result), vec!["route", "agent_outcome", "evaluate"]);
        match &result.outcome {
            EpisodeOutcome::Answer { answer } => {
                assert_eq!(answer.evidence_refs, vec![0, 1]);
                assert!(!answer.incomplete_evidence);
            }
            other => panic!("expected answer, got {other:?}"),
        }
    }

    #[test]
    fn evaluator_feedback_is_visible_to_the_next_route() {
        let setup = Setup::new(
            &[
                r#"{"target": "eutils"}"#,
                r#"{"function": "esearch", "db": "gene", "term": "LMP10"}"#,
                r#"{"next_step": "route_again", "reason": "need the full record, fetch it"}"#,
                r#"{"target": "eutils"}"#,
                r#"{"function": "efetch", "db": "gene", "ids": ["5699"]}"#,
                r#"{"next_step": "generate", "reason": "enough"}"#,
                "Answer: PSMB10",
            ],
            |store| {
                store
                    .store(
                        "GET",
                        &esearch_lmp10_url(),
                        1,
                        200,
                        Some("application/json"),
                        br#"{"esearchresult":{"idlist":[]}}"#,
                        "t",
                    )
                    .unwrap();
                store
                    .store(
                        "GET",
                        &efetch_5699_url(),
                        1,
                        200,
                        Some("text/plain"),
                        b"1. Official Symbol: PSMB10.",
                        "t",
                    )
                    .unwrap();
            },
        );
        let result = setup.run("q");
        result.validate().unwrap();
        assert_eq!(result.outcome.answer_span(), Some("PSMB10"));
        assert_eq!(
            stages(&result),
            vec!["route", "agent_outcome", "evaluate", "route", "agent_outcome", "evaluate"]
        );
        // The second router call sees the evaluator's reason.
        let router_requests: Vec<_> = result
            .trace
            .events
            .iter()
            .filter(|e| e.kind == EventKind::LlmCall && e.payload["purpose"] == "router")
            .map(|e| e.payload["request_user"].as_str().unwrap().to_string())
            .collect();
        assert_eq!(router_requests.len(), 2);
        assert!(router_requests[0].contains("Feedback: (none)"));
        assert!(router_requests[1].contains("need the full record, fetch it"));
    }

    #[test]
    fn rejection_ends_the_episode_without_tools() {
        let setup = Setup::new(
            &[r#"{"target": "reject", "why": "not my field"}"#],
            |_| {},
        );
        let result = setup.run("Who won the world cup?");
        result.validate().unwrap();
        assert_eq!(result.http_calls, 0);
        assert_eq!(result.llm_calls, 1);
        match &result.outcome {
            EpisodeOutcome::Rejected { text } => {
                assert!(text.contains("Who won the world cup?"));
                assert!(text.contains("out of scope"));
                // Template text, not the model's own words.
                assert!(!text.contains("not my field"));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn agent_failure_reaches_the_evaluator_instead_of_aborting() {
        // The eutils agent emits parameters with no fixture behind them, so
        // the step fails; the evaluator then settles for generation.
        let setup = Setup::new(
            &[
                r#"{"target": "eutils"}"#,
                r#"{"function": "esearch", "db": "gene", "term": "UNFIXTURED"}"#,
                r#"{"next_step": "generate", "reason": "cannot gather more"}"#,
                "Answer: unknown",
            ],
            |_| {},
        );
        let result = setup.run("q");
        result.validate().unwrap();
        assert_eq!(result.outcome.answer_span(), Some("unknown"));
        let outcome_event = result
            .trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::Decision && e.payload["stage"] == "agent_outcome")
            .unwrap();
        assert_eq!(outcome_event.payload["ok"], false);
        assert!(outcome_event.payload["error"].as_str().unwrap().contains("fixture"));
    }

    #[test]
    fn step_budget_forces_generation_with_the_limitation_flagged() {
        let mut setup = Setup::new(&["placeholder"], |store| {
            store
                .store(
                    "GET",
                    &esearch_lmp10_url(),
                    1,
                    200,
                    Some("application/json"),
                    br#"{"esearchresult":{"idlist":[]}}"#,
                    "t",
                )
                .unwrap();
        });
        setup.config.max_agent_steps = 2;
        setup.config.max_llm_calls = 50;
        // Router and evaluator never settle; the step cap has to intervene.
        setup.config.controller_backend = BackendConfig::Scripted {
            script: vec![
                r#"{"target": "eutils"}"#.to_string(),
                r#"{"function": "esearch", "db": "gene", "term": "LMP10"}"#.to_string(),
                r#"{"next_step": "route_again", "reason": "keep looking"}"#.to_string(),
            ],
            loop_script: true,
        };
        setup.resources =
            RunResources::build(&setup.config, setup.resources.transport.clone(), prompts())
                .unwrap();
        let result = setup.run("q");
        result.validate().unwrap();
        let forced = result
            .trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::Decision && e.payload["stage"] == "forced_generation")
            .unwrap();
        assert_eq!(forced.payload["agent_steps"], 2);
        match &result.outcome {
            EpisodeOutcome::Answer { answer } => {
                assert!(answer.incomplete_evidence);
                // Looping script answers with the route json; no marker, so the
                // whole text is the span. What matters here is the flag.
                assert!(!answer.text.is_empty());
            }
            other => panic!("expected forced answer, got {other:?}"),
        }
        // The generator prompt names the limitation.
        let last_request = result
            .trace
            .events
            .iter()
            .filter(|e| e.kind == EventKind::LlmCall && e.payload["purpose"] == "generator")
            .next_back()
            .unwrap();
        assert!(last_request.payload["request_user"]
            .as_str()
            .unwrap()
            .contains("stopped before the evaluator was satisfied"));
    }

    #[test]
    fn llm_budget_exhaustion_during_routing_fails_the_episode() {
        let mut setup = Setup::new(&["placeholder"], |_| {});
        setup.config.max_llm_calls = 2;
        setup.config.controller_backend = BackendConfig::Scripted {
            script: vec![
                r#"{"target": "eutils"}"#.to_string(),
                r#"{"function": "esearch", "db": "gene", "term": "X"}"#.to_string(),
                r#"{"next_step": "route_again", "reason": "keep looking"}"#.to_string(),
            ],
            loop_script: true,
        };
        setup.resources =
            RunResources::build(&setup.config, setup.resources.transport.clone(), prompts())
                .unwrap();
        let result = setup.run("q");
        result.validate().unwrap();
        assert_eq!(result.llm_calls, 2);
        match &result.outcome {
            EpisodeOutcome::Failure { stage, .. } => assert_eq!(stage, "llm_budget"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn unrepairable_router_output_is_a_router_failure() {
        let setup = Setup::new(
            &[
                r#"{"target": "telephone"}"#,
                r#"{"target": "telephone"}"#,
                r#"{"target": "telephone"}"#,
            ],
            |_| {},
        );
        let result = setup.run("q");
        result.validate().unwrap();
        match &result.outcome {
            EpisodeOutcome::Failure { stage, message } => {
                assert_eq!(stage, "router");
                assert!(message.contains("telephone"));
            }
            other => panic!("expected failure, got {other:?}"),
        }
        assert_eq!(result.trace.count(EventKind::ParseFailure), 1);
    }

    #[test]
    fn scripted_clock_gives_reproducible_latency() {
        let setup = Setup::new(
            &[r#"{"target": "reject"}"#],
            |_| {},
        );
        let first = setup.run("q");
        let again = Setup::new(&[r#"{"target": "reject"}"#], |_| {}).run("q");
        assert_eq!(first.latency_ms, again.latency_ms);
        assert!(setup.clock.sleeps().is_empty());
    }
}
