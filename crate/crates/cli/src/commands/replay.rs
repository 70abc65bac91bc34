//! `geneqa replay`: validate a trace file and print what happened.

use std::path::PathBuf;

use clap::Args;

use geneqa_core::trace::{EpisodeTrace, EventKind};

use crate::CliError;

#[derive(Args)]
pub struct ReplayArgs {
    /// Trace file (JSONL)
    #[arg(long, value_name = "FILE")]
    pub trace: PathBuf,
}

/// Keys worth surfacing per event, in display order. Anything else falls
/// back to the raw payload.
const SUMMARY_KEYS: [&str; 12] = [
    "stage", "target", "next_step", "ok", "purpose", "finish_reason", "agent", "url",
    "from_cache", "outcome", "answer_span", "code",
];

fn summarize(payload: &serde_json::Value) -> String {
    let Some(map) = payload.as_object() else {
        return payload.to_string();
    };
    let mut parts = Vec::new();
    for key in SUMMARY_KEYS {
        if let Some(value) = map.get(key) {
            let rendered = match value {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            parts.push(format!("{key}={rendered}"));
        }
    }
    if parts.is_empty() {
        let mut raw = payload.to_string();
        if raw.len() > 120 {
            raw.truncate(117);
            raw.push_str("...");
        }
        return raw;
    }
    parts.join(" ")
}

pub fn run(args: ReplayArgs) -> Result<(), CliError> {
    let trace = EpisodeTrace::read_from(&args.trace)
        .map_err(|e| CliError::config(format!("{}: {e}", args.trace.display())))?;

    println!("episode: {}", trace.episode_id);
    for event in &trace.events {
        println!(
            "{:>4}  {:<27}  {:<13}  {}",
            event.seq,
            event.wall_time.to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            format!("{:?}", event.kind),
            summarize(&event.payload)
        );
    }
    let cached = trace.count(EventKind::HttpCall) - trace.http_calls();
    println!();
    println!(
        "events: {}, llm calls: {}, http calls: {} ({} served from cache)",
        trace.events.len(),
        trace.llm_calls(),
        trace.http_calls(),
        cached
    );
    Ok(())
}
