//! Benchmark task vocabulary.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which benchmark a task belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    GeneTuring,
    GeneHop,
}

impl Suite {
    pub fn slug(&self) -> &'static str {
        match self {
            Suite::GeneTuring => "geneturing",
            Suite::GeneHop => "genehop",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Suite::GeneTuring => "GeneTuring",
            Suite::GeneHop => "GeneHop",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Suite {
    type Err = TaskKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geneturing" => Ok(Suite::GeneTuring),
            "genehop" => Ok(Suite::GeneHop),
            other => Err(TaskKindError::UnknownSuite(other.to_string())),
        }
    }
}

/// External API families a task depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiKind {
    Eutils,
    Blast,
    WebSearch,
}

/// The twelve benchmark tasks: nine single-hop, three multi-hop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    GeneAlias,
    GeneDiseaseAssociation,
    GeneLocation,
    HumanGenomeDnaAlignment,
    MultiSpeciesDnaAlignment,
    GeneNameConversion,
    ProteinCodingGenes,
    GeneSnpAssociation,
    SnpLocation,
    SnpGeneFunction,
    DiseaseGeneLocation,
    SequenceGeneAlias,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TaskKindError {
    #[error("unknown task slug {0:?}")]
    UnknownTask(String),
    #[error("unknown suite {0:?}, expected geneturing or genehop")]
    UnknownSuite(String),
}

impl TaskKind {
    pub const ALL: [TaskKind; 12] = [
        TaskKind::GeneAlias,
        TaskKind::GeneDiseaseAssociation,
        TaskKind::GeneLocation,
        TaskKind::HumanGenomeDnaAlignment,
        TaskKind::MultiSpeciesDnaAlignment,
        TaskKind::GeneNameConversion,
        TaskKind::ProteinCodingGenes,
        TaskKind::GeneSnpAssociation,
        TaskKind::SnpLocation,
        TaskKind::SnpGeneFunction,
        TaskKind::DiseaseGeneLocation,
        TaskKind::SequenceGeneAlias,
    ];

    pub fn suite(&self) -> Suite {
        match self {
            TaskKind::SnpGeneFunction
            | TaskKind::DiseaseGeneLocation
            | TaskKind::SequenceGeneAlias => Suite::GeneHop,
            _ => Suite::GeneTuring,
        }
    }

    pub fn of_suite(suite: Suite) -> impl Iterator<Item = TaskKind> {
        TaskKind::ALL.into_iter().filter(move |t| t.suite() == suite)
    }

    /// Stable identifier used in file names, manifests and reports.
    pub fn slug(&self) -> &'static str {
        match self {
            TaskKind::GeneAlias => "gene_alias",
            TaskKind::GeneDiseaseAssociation => "gene_disease_association",
            TaskKind::GeneLocation => "gene_location",
            TaskKind::HumanGenomeDnaAlignment => "human_genome_dna_alignment",
            TaskKind::MultiSpeciesDnaAlignment => "multi_species_dna_alignment",
            TaskKind::GeneNameConversion => "gene_name_conversion",
            TaskKind::ProteinCodingGenes => "protein_coding_genes",
            TaskKind::GeneSnpAssociation => "gene_snp_association",
            TaskKind::SnpLocation => "snp_location",
            TaskKind::SnpGeneFunction => "snp_gene_function",
            TaskKind::DiseaseGeneLocation => "disease_gene_location",
            TaskKind::SequenceGeneAlias => "sequence_gene_alias",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            TaskKind::GeneAlias => "Gene alias",
            TaskKind::GeneDiseaseAssociation => "Gene disease association",
            TaskKind::GeneLocation => "Gene location",
            TaskKind::HumanGenomeDnaAlignment => "Human genome DNA alignment",
            TaskKind::MultiSpeciesDnaAlignment => "Multi-species DNA alignment",
            TaskKind::GeneNameConversion => "Gene name conversion",
            TaskKind::ProteinCodingGenes => "Protein-coding genes",
            TaskKind::GeneSnpAssociation => "Gene SNP association",
            TaskKind::SnpLocation => "SNP location",
            TaskKind::SnpGeneFunction => "SNP gene function",
            TaskKind::DiseaseGeneLocation => "Disease gene location",
            TaskKind::SequenceGeneAlias => "Sequence gene alias",
        }
    }

    /// API families an oracle solution for the task needs to touch.
    pub fn required_apis(&self) -> &'static [ApiKind] {
        match self {
            TaskKind::GeneAlias
            | TaskKind::GeneDiseaseAssociation
            | TaskKind::GeneLocation
            | TaskKind::GeneNameConversion
            | TaskKind::ProteinCodingGenes
            | TaskKind::GeneSnpAssociation
            | TaskKind::SnpLocation
            | TaskKind::SnpGeneFunction
            | TaskKind::DiseaseGeneLocation => &[ApiKind::Eutils],
            TaskKind::HumanGenomeDnaAlignment | TaskKind::MultiSpeciesDnaAlignment => {
                &[ApiKind::Blast]
            }
            TaskKind::SequenceGeneAlias => &[ApiKind::Blast, ApiKind::Eutils],
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for TaskKind {
    type Err = TaskKindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let needle = s.trim().to_ascii_lowercase().replace('-', "_");
        TaskKind::ALL
            .into_iter()
            .find(|t| t.slug() == needle)
            .ok_or_else(|| TaskKindError::UnknownTask(s.to_string()))
    }
}
