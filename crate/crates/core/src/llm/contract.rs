//! JSON output contracts with bounded repair retries.

use crate::llm::{complete, ChatBackend, ChatMessage, ChatRequest, ChatResponse, LlmError};
use serde_json::Value;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    Number,
    Boolean,
    List,
    Object,
    Any,
}

impl ValueKind {
    fn matches(&self, value: &Value) -> bool {
        match self {
            ValueKind::Text => value.is_string(),
            ValueKind::Number => value.is_number(),
            ValueKind::Boolean => value.is_boolean(),
            ValueKind::List => value.is_array(),
            ValueKind::Object => value.is_object(),
            ValueKind::Any => true,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            ValueKind::Text => "string",
            ValueKind::Number => "number",
            ValueKind::Boolean => "boolean",
            ValueKind::List => "array",
            ValueKind::Object => "object",
            ValueKind::Any => "any",
        }
    }
}

/// What a structured reply must look like: required fields with their
/// kinds, and whether unknown fields are tolerated.
#[derive(Debug, Clone)]
pub struct JsonContract {
    required_fields: Vec<(String, ValueKind)>,
    allowed_extra: bool,
}

impl JsonContract {
    /// Panics on an empty field list; a contract that requires nothing is a
    /// programming error.
    pub fn new(required_fields: &[(&str, ValueKind)], allowed_extra: bool) -> Self {
        assert!(!required_fields.is_empty(), "contract needs at least one field");
        JsonContract {
            required_fields: required_fields
                .iter()
                .map(|(name, kind)| (name.to_string(), *kind))
                .collect(),
            allowed_extra,
        }
    }

    pub fn field_names(&self) -> impl Iterator<Item = &str> {
        self.required_fields.iter().map(|(name, _)| name.as_str())
    }

    /// Returns the violations, empty when the value conforms.
    pub fn check(&self, value: &Value) -> Vec<String> {
        let mut violations = Vec::new();
        let object = match value.as_object() {
            Some(o) => o,
            None => return vec!["reply is not a JSON object".to_string()],
        };
        for (name, kind) in &self.required_fields {
            match object.get(name) {
                None => violations.push(format!("missing field {name:?}")),
                Some(v) if !kind.matches(v) => violations.push(format!(
                    "field {name:?} must be a {}, got {}",
                    kind.label(),
                    kind_of(v)
                )),
                _ => {}
            }
        }
        if !self.allowed_extra {
            for key in object.keys() {
                if !self.required_fields.iter().any(|(name, _)| name == key) {
                    violations.push(format!("unexpected field {key:?}"));
                }
            }
        }
        violations
    }

    fn describe(&self) -> String {
        let fields: Vec<String> = self
            .required_fields
            .iter()
            .map(|(name, kind)| format!("{name:?} ({})", kind.label()))
            .collect();
        let mut text = format!("a single JSON object with fields {}", fields.join(", "));
        if !self.allowed_extra {
            text.push_str(" and no other fields");
        }
        text
    }
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Scans for the first balanced `{...}` region that parses as JSON,
/// whether raw, embedded in prose, or inside a code fence.
pub fn extract_first_json(text: &str) -> Option<Value> {
    let bytes = text.as_bytes();
    let mut search_from = 0;
    while let Some(offset) = text[search_from..].find('{') {
        let open = search_from + offset;
        if let Some(end) = balanced_end(bytes, open) {
            if let Ok(value) = serde_json::from_str::<Value>(&text[open..=end]) {
                if value.is_object() {
                    return Some(value);
                }
            }
        }
        search_from = open + 1;
    }
    None
}

/// Index of the brace closing the object opened at `open`, honouring
/// strings and escapes.
fn balanced_end(bytes: &[u8], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (idx, &b) in bytes.iter().enumerate().skip(open) {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(idx);
                }
            }
            _ => {}
        }
    }
    None
}

/// All attempts failed the contract. Carries every raw reply for traces
/// and error classification.
#[derive(Debug, Clone)]
pub struct ContractViolation {
    pub attempts: Vec<String>,
    pub last_violations: Vec<String>,
}

impl fmt::Display for ContractViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "structured output failed after {} attempts: {}",
            self.attempts.len(),
            self.last_violations.join("; ")
        )
    }
}

impl std::error::Error for ContractViolation {}

#[derive(Debug, Clone)]
pub struct StructuredOutcome {
    pub value: Value,
    /// Total model calls spent, including repairs.
    pub attempts: u32,
    pub raw_attempts: Vec<String>,
}

/// Contract loop over an arbitrary completion function: ask, validate,
/// and on violation append a repair message restating the contract, at
/// most `max_repairs` extra times. Non-contract errors (transport, budget)
/// abort immediately.
pub fn complete_structured_with(
    mut run: impl FnMut(&ChatRequest) -> Result<ChatResponse, LlmError>,
    req: &ChatRequest,
    contract: &JsonContract,
    validator: &dyn Fn(&Value) -> Result<(), String>,
    max_repairs: u32,
) -> Result<StructuredOutcome, LlmError> {
    let mut working = req.clone();
    let mut attempts: Vec<String> = Vec::new();
    let mut last_violations = Vec::new();
    for _ in 0..=max_repairs {
        let response = run(&working)?;
        let raw = response.full_text();
        attempts.push(raw.clone());
        let violations = match extract_first_json(&raw) {
            None => vec!["no JSON object found in reply".to_string()],
            Some(value) => {
                let mut violations = contract.check(&value);
                if violations.is_empty() {
                    if let Err(problem) = validator(&value) {
                        violations.push(problem);
                    }
                }
                if violations.is_empty() {
                    return Ok(StructuredOutcome {
                        value,
                        attempts: attempts.len() as u32,
                        raw_attempts: attempts,
                    });
                }
                violations
            }
        };
        working.messages.push(ChatMessage::assistant(raw));
        working.messages.push(ChatMessage::user(format!(
            "That reply was invalid: {}. Respond again with {} and nothing else.",
            violations.join("; "),
            contract.describe()
        )));
        last_violations = violations;
    }
    Err(LlmError::Contract(ContractViolation { attempts, last_violations }))
}

/// Contract loop straight against a backend.
pub fn complete_structured(
    backend: &dyn ChatBackend,
    req: &ChatRequest,
    contract: &JsonContract,
    max_repairs: u32,
) -> Result<StructuredOutcome, LlmError> {
    complete_structured_with(|r| complete(backend, r), req, contract, &|_| Ok(()), max_repairs)
}
