//! Semantic grading for free-text answers. A separate model grades the
//! prediction against the gold answer and must reply with a score in
//! {0, 0.5, 1} plus a reason; malformed replies get bounded repairs.

use std::sync::Arc;

use serde_json::Value;

use crate::agents::PromptLibrary;
use crate::bench::score::Verdict;
use crate::llm::{
    complete, complete_structured_with, ChatBackend, ChatRequest, JsonContract, LlmError,
    ValueKind,
};

pub const DEFAULT_JUDGE_REPAIRS: u32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum JudgeError {
    #[error("judge: {0}")]
    Llm(#[from] LlmError),
    #[error("judge prompt: {0}")]
    Prompt(#[from] crate::agents::PromptError),
}

/// Grades free-text predictions with a model that is not the system under
/// test.
pub struct JudgeClient {
    backend: Arc<dyn ChatBackend>,
    prompts: PromptLibrary,
    max_repairs: u32,
}

impl JudgeClient {
    pub fn new(backend: Arc<dyn ChatBackend>, prompts: PromptLibrary) -> Self {
        JudgeClient { backend, prompts, max_repairs: DEFAULT_JUDGE_REPAIRS }
    }

    pub fn with_repairs(mut self, max_repairs: u32) -> Self {
        self.max_repairs = max_repairs;
        self
    }

    fn contract() -> JsonContract {
        JsonContract::new(&[("score", ValueKind::Number), ("reason", ValueKind::Text)], false)
    }

    fn validate(value: &Value) -> Result<(), String> {
        let score = value["score"].as_f64().unwrap_or(f64::NAN);
        if score == 0.0 || score == 0.5 || score == 1.0 {
            Ok(())
        } else {
            Err(format!("score {} must be exactly 0, 0.5 or 1", value["score"]))
        }
    }

    /// One graded item. The verdict's detail is the judge's stated reason.
    pub fn grade(
        &self,
        question: &str,
        gold: &str,
        prediction: &str,
    ) -> Result<Verdict, JudgeError> {
        let system = self.prompts.render("judge/semantic_system", &[])?;
        let user = self.prompts.render(
            "judge/semantic",
            &[("question", question), ("gold", gold), ("prediction", prediction)],
        )?;
        let request = ChatRequest::new(system, user);
        let outcome = complete_structured_with(
            |r| complete(self.backend.as_ref(), r),
            &request,
            &Self::contract(),
            &Self::validate,
            self.max_repairs,
        )?;
        let score = outcome.value["score"].as_f64().unwrap_or(0.0);
        let reason = outcome.value["reason"].as_str().unwrap_or_default().to_string();
        Ok(Verdict::from_score(score, reason))
    }
}
