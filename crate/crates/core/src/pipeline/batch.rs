//! Runs a set of episodes against one shared resource pool and writes the
//! run directory: per-episode results, traces, and a run summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::agents::{PromptError, PromptLibrary};
use crate::clock::Clock;
use crate::domain::TaskKind;
use crate::llm::LlmError;
use crate::trace::TraceError;
use crate::transport::{RateLimit, Transport, TransportConfig, TransportError, TransportMode};

use super::{run_episode, EpisodeOutcome, PipelineConfig, PipelineConfigError, QaResult};
use super::RunResources;

pub const DEFAULT_WORKERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeInput {
    pub id: String,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskKind>,
}

/// Transport section of a run manifest. Fixture identity never includes
/// secrets, so this is safe to echo into run_meta.json.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportManifest {
    pub mode: TransportMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub byte_cap: Option<usize>,
}

impl TransportManifest {
    pub fn replay(fixture_dir: impl Into<PathBuf>) -> Self {
        TransportManifest {
            mode: TransportMode::Replay,
            fixture_dir: Some(fixture_dir.into()),
            byte_cap: None,
        }
    }

    pub fn to_config(&self) -> Result<TransportConfig, BatchError> {
        let fixture_dir = match self.mode {
            TransportMode::Live => None,
            TransportMode::Record | TransportMode::Replay => match &self.fixture_dir {
                Some(dir) => Some(dir.clone()),
                None => {
                    return Err(BatchError::Manifest(format!(
                        "transport mode {:?} needs a fixture_dir",
                        self.mode
                    )))
                }
            },
        };
        // NCBI allows a higher request rate when an API key is attached.
        let api_key_present =
            std::env::var("NCBI_API_KEY").map(|v| !v.is_empty()).unwrap_or(false);
        Ok(TransportConfig {
            mode: self.mode,
            fixture_dir,
            rate_limit: RateLimit::ncbi(api_key_present),
            byte_cap: self.byte_cap.unwrap_or(crate::transport::DEFAULT_BYTE_CAP),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Directory name for this run's artifacts; derived from the start time
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
    pub pipeline: PipelineConfig,
    pub transport: TransportManifest,
    /// Where the episode inputs came from; echoed into run_meta.json.
    pub dataset: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_prompt_dir")]
    pub prompt_dir: PathBuf,
}

fn default_workers() -> usize {
    DEFAULT_WORKERS
}

fn default_prompt_dir() -> PathBuf {
    PathBuf::from("prompts")
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error(transparent)]
    Config(#[from] PipelineConfigError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug)]
pub struct RunOutput {
    pub run_dir: PathBuf,
    pub results: Vec<QaResult>,
}

/// Scripted backends consume their script in call order, so interleaving
/// episodes across threads would make results depend on scheduling.
pub(crate) fn effective_workers(manifest: &RunManifest) -> usize {
    let scripted = manifest.pipeline.controller_backend.is_scripted()
        || manifest
            .pipeline
            .agent_backend
            .as_ref()
            .is_some_and(|backend| backend.is_scripted());
    if scripted {
        1
    } else {
        manifest.workers.max(1)
    }
}

pub fn run_batch(
    manifest: &RunManifest,
    inputs: &[EpisodeInput],
    clock: Arc<dyn Clock>,
) -> Result<RunOutput, BatchError> {
    manifest.pipeline.validate()?;
    let started = clock.now();
    let transport = Arc::new(Transport::new(manifest.transport.to_config()?, clock.clone())?);
    let prompts = PromptLibrary::load(&manifest.prompt_dir)?;
    let resources = RunResources::build(&manifest.pipeline, transport, prompts)?;
    let workers = effective_workers(manifest);

    let results = run_all(inputs, &manifest.pipeline, &resources, workers);

    let run_id = manifest
        .run_id
        .clone()
        .unwrap_or_else(|| format!("run-{}", started.format("%Y%m%d-%H%M%S")));
    let run_dir = manifest.output_dir.join(&run_id);
    let trace_dir = run_dir.join("traces");
    fs::create_dir_all(&trace_dir).map_err(|e| io_error(&trace_dir, e))?;

    let episodes_path = run_dir.join("episodes.jsonl");
    let mut lines = String::new();
    for result in &results {
        lines.push_str(&serde_json::to_string(result).expect("results serialize"));
        lines.push('\n');
    }
    fs::write(&episodes_path, lines).map_err(|e| io_error(&episodes_path, e))?;

    for result in &results {
        let path = trace_dir.join(format!("{}.jsonl", safe_file_stem(&result.episode_id)));
        result.trace.write_to(&path)?;
    }

    let finished = clock.now();
    let meta = json!({
        "run_id": run_id,
        "started": started.to_rfc3339(),
        "finished": finished.to_rfc3339(),
        "episodes": results.len(),
        "answers": count(&results, |o| matches!(o, EpisodeOutcome::Answer { .. })),
        "rejections": count(&results, |o| matches!(o, EpisodeOutcome::Rejected { .. })),
        "failures": count(&results, |o| matches!(o, EpisodeOutcome::Failure { .. })),
        "workers": workers,
        "manifest": manifest,
    });
    let meta_path = run_dir.join("run_meta.json");
    let meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    fs::write(&meta_path, meta_text).map_err(|e| io_error(&meta_path, e))?;

    Ok(RunOutput { run_dir, results })
}

fn count(results: &[QaResult], pred: impl Fn(&EpisodeOutcome) -> bool) -> usize {
    results.iter().filter(|r| pred(&r.outcome)).count()
}

fn io_error(path: &Path, source: std::io::Error) -> BatchError {
    BatchError::Io { path: path.to_path_buf(), source }
}

/// Maps an episode id to the stem of its trace file name.
pub fn safe_file_stem(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

fn run_all(
    inputs: &[EpisodeInput],
    config: &PipelineConfig,
    resources: &RunResources,
    workers: usize,
) -> Vec<QaResult> {
    if workers <= 1 || inputs.len() <= 1 {
        return inputs
            .iter()
            .map(|input| run_episode(&input.id, &input.question, input.task, config, resources))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<QaResult>>> = Mutex::new(inputs.iter().map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.min(inputs.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= inputs.len() {
                    break;
                }
                let input = &inputs[index];
                let result =
                    run_episode(&input.id, &input.question, input.task, config, resources);
                slots.lock().expect("no panics while holding the lock")[index] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker threads joined")
        .into_iter()
        .map(|slot| slot.expect("every index was claimed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FakeClock;
    use crate::llm::BackendConfig;
    use crate::pipeline::{PipelineMode, PromptProfile};
    use crate::pipeline::{DEFAULT_MAX_AGENT_STEPS, DEFAULT_MAX_LLM_CALLS};

    fn write_prompt_files(root: &Path) {
        let entries = [
            ("monolithic/system.txt", "You answer genomics questions with NCBI tools."),
            ("monolithic/task_plain.txt", "Answer using the APIs when needed."),
            ("monolithic/doc_eutils.txt", "E-utilities usage notes."),
            ("monolithic/doc_blast.txt", "BLAST usage notes."),
            ("monolithic/demo_alias.txt", "Demo: alias lookup."),
            ("monolithic/demo_gene_snp.txt", "Demo: snp to gene."),
            ("monolithic/demo_gene_disease.txt", "Demo: disease genes."),
            ("monolithic/demo_alignment.txt", "Demo: alignment."),
        ];
        for (rel, text) in entries {
            let path = root.join(rel);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, text).unwrap();
        }
    }

    fn manifest(dir: &Path, script: &[&str]) -> RunManifest {
        let fixture_dir = dir.join("fixtures");
        fs::create_dir_all(&fixture_dir).unwrap();
        write_prompt_files(&dir.join("prompts"));
        RunManifest {
            run_id: Some("test-run".to_string()),
            pipeline: PipelineConfig {
                mode: PipelineMode::Monolithic,
                controller_backend: BackendConfig::scripted(script),
                agent_backend: None,
                max_agent_steps: DEFAULT_MAX_AGENT_STEPS,
                max_llm_calls: DEFAULT_MAX_LLM_CALLS,
                profile: PromptProfile::full(),
            },
            transport: TransportManifest::replay(fixture_dir),
            dataset: dir.join("dataset.json"),
            output_dir: dir.join("out"),
            workers: DEFAULT_WORKERS,
            prompt_dir: dir.join("prompts"),
        }
    }

    fn inputs(ids: &[&str]) -> Vec<EpisodeInput> {
        ids.iter()
            .map(|id| EpisodeInput {
                id: id.to_string(),
                question: format!("question for {id}"),
                task: Some(TaskKind::GeneAlias),
            })
            .collect()
    }

    #[test]
    fn batch_writes_episodes_traces_and_run_meta() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = manifest(dir.path(), &["Answer: A", "Answer: B"]);
        let clock = Arc::new(FakeClock::new());
        let output = run_batch(&manifest, &inputs(&["ep1", "ep2"]), clock).unwrap();

        assert_eq!(output.results.len(), 2);
        assert_eq!(output.results[0].episode_id, "ep1");
        assert_eq!(output.results[0].outcome.answer_span(), Some("A"));
        assert_eq!(output.results[1].outcome.answer_span(), Some("B"));

        let episodes = fs::read_to_string(output.run_dir.join("episodes.jsonl")).unwrap();
        let parsed: Vec<QaResult> = episodes
            .lines()
            .map(|line| serde_json::from_str(line).unwrap())
            .collect();
        assert_eq!(parsed.len(), 2);
        parsed.iter().for_each(|r| r.validate().unwrap());

        assert!(output.run_dir.join("traces/ep1.jsonl").is_file());
        assert!(output.run_dir.join("traces/ep2.jsonl").is_file());

        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(output.run_dir.join("run_meta.json")).unwrap())
                .unwrap();
        assert_eq!(meta["run_id"], "test-run");
        assert_eq!(meta["episodes"], 2);
        assert_eq!(meta["answers"], 2);
        assert_eq!(meta["workers"], 1);
        assert_eq!(meta["manifest"]["pipeline"]["mode"], "monolithic");
    }

    #[test]
    fn scripted_backends_force_a_single_worker() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(dir.path(), &["Answer: A"]);
        m.workers = 8;
        assert_eq!(effective_workers(&m), 1);
        m.pipeline.controller_backend = BackendConfig::RemoteHttp {
            endpoint: "http://localhost:9/v1/chat/completions".to_string(),
            model_name: "m".to_string(),
            request_timeout_ms: 1000,
            headers: Default::default(),
            response_text_path: None,
        };
        assert_eq!(effective_workers(&m), 8);
        m.pipeline.agent_backend = Some(BackendConfig::scripted(&["x"]));
        assert_eq!(effective_workers(&m), 1);
    }

    #[test]
    fn worker_pool_keeps_results_in_input_order() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(dir.path(), &[]);
        let mut config = m.pipeline.clone();
        config.controller_backend = BackendConfig::Scripted {
            script: vec!["Answer: done".to_string()],
            loop_script: true,
        };
        let clock = Arc::new(FakeClock::new());
        let transport = Arc::new(
            Transport::new(m.transport.to_config().unwrap(), clock).unwrap(),
        );
        let resources = RunResources::build(
            &config,
            transport,
            PromptLibrary::load(&m.prompt_dir).unwrap(),
        )
        .unwrap();
        let episode_inputs = inputs(&["a", "b", "c", "d", "e"]);
        let results = run_all(&episode_inputs, &config, &resources, 3);
        let ids: Vec<_> = results.iter().map(|r| r.episode_id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c", "d", "e"]);
        results.iter().for_each(|r| assert_eq!(r.outcome.answer_span(), Some("done")));
    }

    #[test]
    fn replay_without_a_fixture_dir_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = manifest(dir.path(), &["Answer: A"]);
        m.transport.fixture_dir = None;
        let err = run_batch(&m, &inputs(&["ep1"]), Arc::new(FakeClock::new())).unwrap_err();
        assert!(matches!(err, BatchError::Manifest(_)));
        assert!(err.to_string().contains("fixture_dir"));
    }

    #[test]
    fn manifest_toml_applies_defaults() {
        let text = r#"
            dataset = "data/sample.json"
            output_dir = "runs"

            [pipeline]
            mode = "multi_agent"
            [pipeline.controller_backend]
            kind = "scripted"
            script = ["x"]

            [transport]
            mode = "replay"
            fixture_dir = "fixtures"
        "#;
        let m: RunManifest = toml::from_str(text).unwrap();
        assert_eq!(m.workers, DEFAULT_WORKERS);
        assert_eq!(m.prompt_dir, PathBuf::from("prompts"));
        assert_eq!(m.run_id, None);
        assert_eq!(m.pipeline.max_llm_calls, DEFAULT_MAX_LLM_CALLS);
        assert_eq!(m.transport.byte_cap, None);
    }

    #[test]
    fn episode_ids_become_safe_file_names() {
        assert_eq!(safe_file_stem("task/one:two"), "task_one_two");
        assert_eq!(safe_file_stem("plain-id_3.x"), "plain-id_3.x");
    }
}
