//! The manifest file shared by every command, plus the flag overrides
//! that apply on top of it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use geneqa_core::bench::SpeciesMap;
use geneqa_core::clock::{Clock, FakeClock, SystemClock};
use geneqa_core::llm::BackendConfig;
use geneqa_core::pipeline::{
    PipelineConfig, PipelineMode, ProfileName, PromptProfile, RunManifest, TransportManifest,
    DEFAULT_WORKERS,
};
use geneqa_core::transport::TransportMode;

use crate::CliError;

/// Judge backend declaration, kept apart from the pipeline backends so
/// grading never shares a script with the system under test.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    pub backend: BackendConfig,
}

/// Manifest schema. `dataset` stays optional because `ask` needs no
/// dataset; commands that do need one report the missing field.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub run_id: Option<String>,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_prompt_dir")]
    pub prompt_dir: PathBuf,
    pub pipeline: PipelineConfig,
    pub transport: TransportManifest,
    #[serde(default)]
    pub judge: Option<JudgeSection>,
    #[serde(default)]
    pub species_map: Option<PathBuf>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_workers() -> usize {
    DEFAULT_WORKERS
}

fn default_prompt_dir() -> PathBuf {
    PathBuf::from("prompts")
}

impl Manifest {
    /// Reads a manifest and resolves every relative path in it against the
    /// manifest's own directory, so commands work from any directory.
    pub fn load(path: &Path) -> Result<Manifest, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
        let mut manifest: Manifest = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("parsing {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        manifest.rebase(base);
        Ok(manifest)
    }

    fn rebase(&mut self, base: &Path) {
        if base.as_os_str().is_empty() {
            return;
        }
        let mut paths = vec![
            &mut self.output_dir,
            &mut self.prompt_dir,
        ];
        paths.extend(self.dataset.as_mut());
        paths.extend(self.species_map.as_mut());
        paths.extend(self.transport.fixture_dir.as_mut());
        for path in paths {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn species_map(&self) -> Result<SpeciesMap, CliError> {
        match &self.species_map {
            Some(path) => SpeciesMap::load(path)
                .map_err(|e| CliError::config(format!("species map {}: {e}", path.display()))),
            None => Ok(SpeciesMap::builtin()),
        }
    }

    /// Assembles the manifest the batch runner consumes.
    pub fn to_run_manifest(&self, run_id: Option<String>) -> Result<RunManifest, CliError> {
        let dataset = self.dataset.clone().ok_or_else(|| {
            CliError::config("manifest needs a dataset directory for this command")
        })?;
        Ok(RunManifest {
            run_id: run_id.or_else(|| self.run_id.clone()),
            pipeline: self.pipeline.clone(),
            transport: self.transport.clone(),
            dataset,
            output_dir: self.output_dir.clone(),
            workers: self.workers,
            prompt_dir: self.prompt_dir.clone(),
        })
    }

    /// Replay runs against scripted backends have no external time source,
    /// so they can use the deterministic clock and produce byte-identical
    /// artifacts; anything touching a live service needs wall time.
    pub fn deterministic(&self) -> bool {
        let scripted_controller = self.pipeline.controller_backend.is_scripted();
        let scripted_agent =
            self.pipeline.agent_backend.as_ref().map_or(true, |b| b.is_scripted());
        matches!(self.transport.mode, TransportMode::Replay)
            && scripted_controller
            && scripted_agent
    }

    pub fn pick_clock(&self) -> Arc<dyn Clock> {
        if self.deterministic() {
            Arc::new(FakeClock::new())
        } else {
            Arc::new(SystemClock)
        }
    }
}

/// Applies a `--mode` flag on top of the manifest pipeline section.
pub fn apply_mode(pipeline: &mut PipelineConfig, flag: Option<&str>) -> Result<(), CliError> {
    let Some(raw) = flag else { return Ok(()) };
    pipeline.mode = match raw.to_ascii_lowercase().as_str() {
        "monolithic" => PipelineMode::Monolithic,
        "multiagent" | "multi_agent" | "multi-agent" => PipelineMode::MultiAgent,
        other => {
            return Err(CliError::config(format!(
                "unknown mode {other:?}, expected monolithic or multiagent"
            )))
        }
    };
    Ok(())
}

/// Applies a `--profile` flag. The named profile replaces the manifest's
/// doc and demo selection; the prompt style carries over.
pub fn apply_profile(pipeline: &mut PipelineConfig, flag: Option<&str>) -> Result<(), CliError> {
    let Some(raw) = flag else { return Ok(()) };
    let name = match raw.to_ascii_lowercase().replace('-', "_").as_str() {
        "full" => ProfileName::Full,
        "slim" => ProfileName::Slim,
        "genehop_eutils" | "gene_hop_eutils" => ProfileName::GeneHopEutils,
        "genehop_blast_eutils" | "gene_hop_blast_eutils" => ProfileName::GeneHopBlastEutils,
        other => {
            return Err(CliError::config(format!(
                "unknown profile {other:?}, expected full, slim, genehop_eutils or genehop_blast_eutils"
            )))
        }
    };
    let style = pipeline.profile.style;
    let mut profile = PromptProfile::named(name);
    profile.style = style;
    pipeline.profile = profile;
    Ok(())
}
