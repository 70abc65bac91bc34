//! `geneqa annotate`: attach an error category to an episode trace.

use std::path::PathBuf;

use clap::Args;

use geneqa_core::clock::SystemClock;
use geneqa_core::domain::{ErrorCategory, ErrorCode};
use geneqa_core::trace::append_annotation;

use crate::commands::trace_path;
use crate::CliError;

#[derive(Args)]
pub struct AnnotateArgs {
    /// Run directory holding traces/
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Episode id to annotate
    #[arg(long, value_name = "ID")]
    pub episode: String,
    /// Error category: E1, E2, E3, E4, E5 or O
    #[arg(long, value_name = "CODE")]
    pub code: String,
    /// What went wrong, in your words
    #[arg(long, value_name = "TEXT")]
    pub note: String,
}

pub fn run(args: AnnotateArgs) -> Result<(), CliError> {
    let code: ErrorCode = args.code.parse().map_err(|e| CliError::config(format!("{e}")))?;
    let path = trace_path(&args.run, &args.episode);
    if !path.is_file() {
        return Err(CliError::config(format!(
            "no trace for episode {} at {}",
            args.episode,
            path.display()
        )));
    }
    let category = ErrorCategory { code, note: args.note.clone() };
    let trace = append_annotation(&path, &category, &SystemClock)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    println!(
        "episode {} annotated {} ({}); trace now holds {} events",
        args.episode,
        code,
        code.description(),
        trace.events.len()
    );
    Ok(())
}
