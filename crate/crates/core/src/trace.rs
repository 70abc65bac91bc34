//! Append-only episode traces.
//!
//! Every decision, model call, HTTP call, parse failure and termination is
//! recorded as one event. The disk format is line-delimited JSON so a trace
//! from a crashed run is readable up to the last completed event. Error
//! annotations are appended to the same file by the annotation tooling.

use crate::clock::Clock;
use crate::domain::ErrorCategory;
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Decision,
    LlmCall,
    HttpCall,
    ParseFailure,
    Termination,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub episode_id: String,
    pub seq: u64,
    pub kind: EventKind,
    #[serde(
        serialize_with = "serialize_wall_time",
        deserialize_with = "deserialize_wall_time"
    )]
    pub wall_time: DateTime<Utc>,
    pub payload: serde_json::Value,
}

fn serialize_wall_time<S: serde::Serializer>(
    time: &DateTime<Utc>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&time.to_rfc3339_opts(SecondsFormat::Micros, true))
}

fn deserialize_wall_time<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
) -> Result<DateTime<Utc>, D::Error> {
    let raw = String::deserialize(deserializer)?;
    DateTime::parse_from_rfc3339(&raw)
        .map(|t| t.with_timezone(&Utc))
        .map_err(serde::de::Error::custom)
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
    #[error("trace line {line} is not a valid event: {source}")]
    BadLine { line: usize, source: serde_json::Error },
    #[error("trace is empty")]
    Empty,
    #[error("trace event {seq} belongs to episode {found:?}, expected {expected:?}")]
    MixedEpisodes { seq: u64, found: String, expected: String },
    #[error("trace events out of order at seq {seq}")]
    OutOfOrder { seq: u64 },
}

/// A complete episode log. Events are strictly ordered by both sequence
/// number and wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub episode_id: String,
    pub events: Vec<TraceEvent>,
}

impl EpisodeTrace {
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut prev: Option<&TraceEvent> = None;
        for event in &self.events {
            if event.episode_id != self.episode_id {
                return Err(TraceError::MixedEpisodes {
                    seq: event.seq,
                    found: event.episode_id.clone(),
                    expected: self.episode_id.clone(),
                });
            }
            if let Some(p) = prev {
                if event.seq <= p.seq || event.wall_time <= p.wall_time {
                    return Err(TraceError::OutOfOrder { seq: event.seq });
                }
            }
            prev = Some(event);
        }
        Ok(())
    }

    pub fn count(&self, kind: EventKind) -> u32 {
        self.events.iter().filter(|e| e.kind == kind).count() as u32
    }

    pub fn llm_calls(&self) -> u32 {
        self.count(EventKind::LlmCall)
    }

    /// Executed HTTP calls; cache hits recorded as events do not count.
    pub fn http_calls(&self) -> u32 {
        self.events
            .iter()
            .filter(|e| {
                e.kind == EventKind::HttpCall
                    && e.payload.get("from_cache").and_then(|v| v.as_bool()) != Some(true)
            })
            .count() as u32
    }

    pub fn annotations(&self) -> Vec<ErrorCategory> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Annotation)
            .filter_map(|e| serde_json::from_value(e.payload.clone()).ok())
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("trace events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut events = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let event: TraceEvent = serde_json::from_str(line)
                .map_err(|source| TraceError::BadLine { line: idx + 1, source })?;
            events.push(event);
        }
        let episode_id = events.first().ok_or(TraceError::Empty)?.episode_id.clone();
        let trace = EpisodeTrace { episode_id, events };
        trace.validate()?;
        Ok(trace)
    }

    pub fn write_to(&self, path: &Path) -> Result<(), TraceError> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, TraceError> {
        let text = std::fs::read_to_string(path)?;
        EpisodeTrace::from_jsonl(&text)
    }
}

/// Appends an annotation event to a trace file on disk.
pub fn append_annotation(
    path: &Path,
    category: &ErrorCategory,
    clock: &dyn Clock,
) -> Result<EpisodeTrace, TraceError> {
    let mut trace = EpisodeTrace::read_from(path)?;
    let last = trace.events.last().expect("validated trace is non-empty");
    let mut wall_time = clock.now();
    if wall_time <= last.wall_time {
        wall_time = last.wall_time + chrono::Duration::microseconds(1);
    }
    let event = TraceEvent {
        episode_id: trace.episode_id.clone(),
        seq: last.seq + 1,
        kind: EventKind::Annotation,
        wall_time,
        payload: serde_json::to_value(category).expect("categories serialize"),
    };
    let mut file = std::fs::OpenOptions::new().append(true).open(path)?;
    writeln!(file, "{}", serde_json::to_string(&event).expect("trace events serialize"))?;
    trace.events.push(event);
    Ok(trace)
}

/// Collects events for one episode while it runs, guaranteeing strictly
/// increasing sequence numbers and wall times.
pub struct TraceRecorder {
    episode_id: String,
    clock: std::sync::Arc<dyn Clock>,
    inner: Mutex<RecorderState>,
}

struct RecorderState {
    events: Vec<TraceEvent>,
    last_time: Option<DateTime<Utc>>,
}

impl TraceRecorder {
    pub fn new(episode_id: impl Into<String>, clock: std::sync::Arc<dyn Clock>) -> Self {
        TraceRecorder {
            episode_id: episode_id.into(),
            clock,
            inner: Mutex::new(RecorderState { events: Vec::new(), last_time: None }),
        }
    }

    pub fn episode_id(&self) -> &str {
        &self.episode_id
    }

    pub fn record(&self, kind: EventKind, payload: serde_json::Value) {
        let mut state = self.inner.lock().unwrap();
        let mut wall_time = self.clock.now();
        if let Some(last) = state.last_time {
            if wall_time <= last {
                wall_time = last + chrono::Duration::microseconds(1);
            }
        }
        state.last_time = Some(wall_time);
        let seq = state.events.len() as u64;
        state.events.push(TraceEvent {
            episode_id: self.episode_id.clone(),
            seq,
            kind,
            wall_time,
            payload,
        });
    }

    pub fn finish(self) -> EpisodeTrace {
        let state = self.inner.into_inner().unwrap();
        EpisodeTrace { episode_id: self.episode_id, events: state.events }
    }
}
