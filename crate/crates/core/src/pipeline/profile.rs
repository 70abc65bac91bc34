//! Prompt profiles: which documentation blocks and worked demonstrations
//! a monolithic prompt carries, and in which style.
//!
//! A prompt is always assembled in the same order: task description,
//! API documentation, demonstrations, question. Named profiles fix the
//! doc/demo pattern; `Custom` spells it out.

use crate::agents::{PromptError, PromptLibrary};
use crate::domain::TaskKind;
use crate::llm::ChatRequest;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Full,
    Slim,
    GeneHopEutils,
    GeneHopBlastEutils,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Eutils,
    Blast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Alias,
    GeneSnp,
    GeneDisease,
    Alignment,
}

impl DemoKind {
    fn template(&self, style: PromptStyle) -> &'static str {
        match (self, style) {
            (DemoKind::Alias, PromptStyle::Plain) => "monolithic/demo_alias",
            (DemoKind::Alias, PromptStyle::ReAct) => "monolithic/demo_alias_react",
            (DemoKind::GeneSnp, PromptStyle::Plain) => "monolithic/demo_gene_snp",
            (DemoKind::GeneSnp, PromptStyle::ReAct) => "monolithic/demo_gene_snp_react",
            (DemoKind::GeneDisease, PromptStyle::Plain) => "monolithic/demo_gene_disease",
            (DemoKind::GeneDisease, PromptStyle::ReAct) => "monolithic/demo_gene_disease_react",
            (DemoKind::Alignment, PromptStyle::Plain) => "monolithic/demo_alignment",
            (DemoKind::Alignment, PromptStyle::ReAct) => "monolithic/demo_alignment_react",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    #[default]
    Plain,
    #[serde(rename = "react")]
    ReAct,
}

/// Serialized form: named profiles may not override the fixed pattern.
#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    name: ProfileName,
    #[serde(default)]
    style: PromptStyle,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    docs: Option<Vec<DocKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    demos: Option<Vec<DemoKind>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct PromptProfile {
    pub name: ProfileName,
    pub style: PromptStyle,
    pub docs: Vec<DocKind>,
    pub demos: Vec<DemoKind>,
}

impl PromptProfile {
    pub fn full() -> Self {
        PromptProfile {
            name: ProfileName::Full,
            style: PromptStyle::Plain,
            docs: vec![DocKind::Eutils, DocKind::Blast],
            demos: vec![DemoKind::Alias, DemoKind::GeneSnp, DemoKind::GeneDisease, DemoKind::Alignment],
        }
    }

    pub fn slim() -> Self {
        PromptProfile {
            name: ProfileName::Slim,
            style: PromptStyle::Plain,
            docs: vec![],
            demos: vec![DemoKind::Alias, DemoKind::Alignment],
        }
    }

    pub fn genehop_eutils() -> Self {
        PromptProfile {
            name: ProfileName::GeneHopEutils,
            style: PromptStyle::Plain,
            docs: vec![DocKind::Eutils],
            demos: vec![DemoKind::Alias, DemoKind::GeneSnp, DemoKind::GeneDisease],
        }
    }

    pub fn genehop_blast_eutils() -> Self {
        PromptProfile {
            name: ProfileName::GeneHopBlastEutils,
            style: PromptStyle::Plain,
            docs: vec![DocKind::Eutils, DocKind::Blast],
            demos: vec![DemoKind::Alias, DemoKind::GeneDisease, DemoKind::Alignment],
        }
    }

    pub fn custom(docs: Vec<DocKind>, demos: Vec<DemoKind>) -> Self {
        PromptProfile { name: ProfileName::Custom, style: PromptStyle::Plain, docs, demos }
    }

    pub fn named(name: ProfileName) -> Self {
        match name {
            ProfileName::Full => PromptProfile::full(),
            ProfileName::Slim => PromptProfile::slim(),
            ProfileName::GeneHopEutils => PromptProfile::genehop_eutils(),
            ProfileName::GeneHopBlastEutils => PromptProfile::genehop_blast_eutils(),
            ProfileName::Custom => PromptProfile::custom(vec![], vec![]),
        }
    }

    pub fn with_style(mut self, style: PromptStyle) -> Self {
        self.style = style;
        self
    }
}

impl TryFrom<ProfileRepr> for PromptProfile {
    type Error = String;

    fn try_from(repr: ProfileRepr) -> Result<Self, Self::Error> {
        if repr.name == ProfileName::Custom {
            return Ok(PromptProfile {
                name: ProfileName::Custom,
                style: repr.style,
                docs: repr.docs.unwrap_or_default(),
                demos: repr.demos.unwrap_or_default(),
            });
        }
        let fixed = PromptProfile::named(repr.name).with_style(repr.style);
        if let Some(docs) = repr.docs {
            if docs != fixed.docs {
                return Err("a named profile fixes its docs; use the custom profile to override".to_string());
            }
        }
        if let Some(demos) = repr.demos {
            if demos != fixed.demos {
                return Err("a named profile fixes its demos; use the custom profile to override".to_string());
            }
        }
        Ok(fixed)
    }
}

impl From<PromptProfile> for ProfileRepr {
    fn from(profile: PromptProfile) -> Self {
        let custom = profile.name == ProfileName::Custom;
        ProfileRepr {
            name: profile.name,
            style: profile.style,
            docs: custom.then_some(profile.docs),
            demos: custom.then_some(profile.demos),
        }
    }
}

/// Multi-hop decomposition guidance included in ReAct-style prompts.
fn hop_guidance_template(task: TaskKind) -> Option<&'static str> {
    match task {
        TaskKind::SnpGeneFunction => Some("monolithic/hop_snp_gene_function"),
        TaskKind::DiseaseGeneLocation => Some("monolithic/hop_disease_gene_location"),
        TaskKind::SequenceGeneAlias => Some("monolithic/hop_sequence_gene_alias"),
        _ => None,
    }
}

/// Assembles the complete prompt: task description, then docs, then
/// demonstrations, then the question, joined by blank lines.
pub fn build_prompt(
    prompts: &PromptLibrary,
    profile: &PromptProfile,
    question: &str,
    task: Option<TaskKind>,
) -> Result<ChatRequest, PromptError> {
    let mut sections: Vec<String> = Vec::new();
    let task_template = match profile.style {
        PromptStyle::Plain => "monolithic/task_plain",
        PromptStyle::ReAct => "monolithic/task_react",
    };
    sections.push(prompts.get(task_template)?.trim().to_string());
    if profile.style == PromptStyle::ReAct {
        if let Some(template) = task.and_then(hop_guidance_template) {
            sections.push(prompts.get(template)?.trim().to_string());
        }
    }
    for doc in &profile.docs {
        let template = match doc {
            DocKind::Eutils => "monolithic/doc_eutils",
            DocKind::Blast => "monolithic/doc_blast",
        };
        sections.push(prompts.get(template)?.trim().to_string());
    }
    for demo in &profile.demos {
        sections.push(prompts.get(demo.template(profile.style))?.trim().to_string());
    }
    sections.push(format!("Question: {question}"));
    Ok(ChatRequest::new(prompts.get("monolithic/system")?, sections.join("\n\n")))
}
