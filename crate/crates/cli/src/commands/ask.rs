//! `geneqa ask`: answer one question and write its trace.

use std::path::PathBuf;
use std::sync::Arc;

use clap::Args;

use geneqa_core::agents::PromptLibrary;
use geneqa_core::pipeline::{run_episode, EpisodeOutcome, RunResources};
use geneqa_core::transport::Transport;

use crate::manifest::{apply_mode, apply_profile, Manifest};
use crate::CliError;

#[derive(Args)]
pub struct AskArgs {
    /// The question to answer
    pub question: String,
    /// Manifest file (TOML)
    #[arg(long, value_name = "FILE")]
    pub manifest: PathBuf,
    /// Trace destination (default: <output_dir>/ask-trace.jsonl)
    #[arg(long, value_name = "FILE")]
    pub trace_out: Option<PathBuf>,
    /// Pipeline mode override: monolithic or multiagent
    #[arg(long, value_name = "MODE")]
    pub mode: Option<String>,
    /// Prompt profile override
    #[arg(long, value_name = "NAME")]
    pub profile: Option<String>,
}

pub fn run(args: AskArgs) -> Result<(), CliError> {
    let mut manifest = Manifest::load(&args.manifest)?;
    apply_mode(&mut manifest.pipeline, args.mode.as_deref())?;
    apply_profile(&mut manifest.pipeline, args.profile.as_deref())?;
    manifest.pipeline.validate().map_err(|e| CliError::config(e.to_string()))?;

    let clock = manifest.pick_clock();
    let transport_config = manifest
        .transport
        .to_config()
        .map_err(|e| CliError::config(e.to_string()))?;
    let transport = Arc::new(
        Transport::new(transport_config, clock).map_err(|e| CliError::config(e.to_string()))?,
    );
    let prompts = PromptLibrary::load(&manifest.prompt_dir)
        .map_err(|e| CliError::config(e.to_string()))?;
    let resources = RunResources::build(&manifest.pipeline, transport, prompts)
        .map_err(|e| CliError::config(e.to_string()))?;

    let result = run_episode("ask", &args.question, None, &manifest.pipeline, &resources);

    let trace_path = args
        .trace_out
        .unwrap_or_else(|| manifest.output_dir.join("ask-trace.jsonl"));
    result
        .trace
        .write_to(&trace_path)
        .map_err(|e| CliError::config(format!("writing {}: {e}", trace_path.display())))?;

    match &result.outcome {
        EpisodeOutcome::Answer { answer } => {
            println!("{}", answer.text.trim_end());
            println!();
            if answer.incomplete_evidence {
                println!("note: evidence gathering stopped early; the answer may be incomplete");
            }
            println!("answer span: {}", answer.answer_span);
            println!("trace: {}", trace_path.display());
            Ok(())
        }
        EpisodeOutcome::Rejected { text } => {
            println!("{text}");
            println!();
            println!("trace: {}", trace_path.display());
            Ok(())
        }
        EpisodeOutcome::Failure { stage, message } => {
            // A fixture miss means the environment lacks a recording, which
            // is a configuration problem rather than a pipeline failure.
            if message.contains("no fixture for request") {
                Err(CliError::config(format!("{stage}: {message}")))
            } else {
                Err(CliError::pipeline(format!("{stage}: {message}")))
            }
        }
    }
}
