//! Per-item scoring rules. Every task maps to exactly one rule; all rules
//! return a [`Verdict`] whose bucket follows from the score alone.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{parse_genome_locus, GenomeLocus, GoldAnswer, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CaseMode {
    /// Case-folded comparison; scores the substance of prose answers.
    #[default]
    Fold,
    /// Byte-exact comparison for harsher grading.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRuleKind {
    StringMatch,
    Recall,
    GenomeAlignmentHalfCredit,
    SpeciesMap,
    BinaryMap,
    JudgeSemantic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRule {
    pub kind: ScoreRuleKind,
    #[serde(default)]
    pub case_mode: CaseMode,
    /// When set, gold may occur anywhere in the answer span as long as the
    /// occurrence is token-bounded; otherwise the whole trimmed span must
    /// equal the gold string.
    #[serde(default = "default_containment")]
    pub containment: bool,
}

fn default_containment() -> bool {
    true
}

impl ScoreRule {
    pub fn new(kind: ScoreRuleKind) -> Self {
        ScoreRule { kind, case_mode: CaseMode::Fold, containment: true }
    }

    pub fn strict(kind: ScoreRuleKind) -> Self {
        ScoreRule { kind, case_mode: CaseMode::Exact, containment: false }
    }
}

/// The rule each task is graded under.
pub fn rule_for_task(task: TaskKind) -> ScoreRule {
    let kind = match task {
        TaskKind::GeneAlias
        | TaskKind::GeneLocation
        | TaskKind::GeneNameConversion
        | TaskKind::GeneSnpAssociation
        | TaskKind::SnpLocation => ScoreRuleKind::StringMatch,
        TaskKind::GeneDiseaseAssociation
        | TaskKind::DiseaseGeneLocation
        | TaskKind::SequenceGeneAlias => ScoreRuleKind::Recall,
        TaskKind::HumanGenomeDnaAlignment => ScoreRuleKind::GenomeAlignmentHalfCredit,
        TaskKind::MultiSpeciesDnaAlignment => ScoreRuleKind::SpeciesMap,
        TaskKind::ProteinCodingGenes => ScoreRuleKind::BinaryMap,
        TaskKind::SnpGeneFunction => ScoreRuleKind::JudgeSemantic,
    };
    ScoreRule::new(kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    Correct,
    Half,
    Error,
}

/// One graded item. The bucket is always derived from the score, so the
/// two can never disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub score: f64,
    pub bucket: Bucket,
    pub detail: String,
}

impl Verdict {
    pub fn from_score(score: f64, detail: impl Into<String>) -> Self {
        let bucket = if score >= 1.0 {
            Bucket::Correct
        } else if score <= 0.0 {
            Bucket::Error
        } else {
            Bucket::Half
        };
        Verdict { score: score.clamp(0.0, 1.0), bucket, detail: detail.into() }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("recall gold set is empty")]
    EmptyGold,
    #[error("species {0:?} is not in the species table")]
    UnknownSpecies(String),
    #[error("binary gold {0:?} is neither TRUE nor NA")]
    BadBinaryGold(String),
    #[error("task {task} expects a {expected} gold answer, got {found}")]
    GoldShape { task: TaskKind, expected: &'static str, found: &'static str },
    #[error("task {0} is graded by the judge")]
    NeedsJudge(TaskKind),
    #[error("species table: {0}")]
    SpeciesTable(String),
}

fn fold(text: &str, mode: CaseMode) -> String {
    match mode {
        CaseMode::Fold => text.to_lowercase(),
        CaseMode::Exact => text.to_string(),
    }
}

/// Characters that belong to one token. The hyphen is included because
/// fused gene symbols like POC1B-GALNT4 name a different gene than either
/// half alone.
fn is_token_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-'
}

/// Whether `needle` occurs in `haystack` with non-token characters (or the
/// text edge) on both sides of the occurrence.
fn contains_token_bounded(haystack: &str, needle: &str) -> bool {
    let needle = needle.trim();
    if needle.is_empty() {
        return false;
    }
    let mut from = 0;
    while let Some(found) = haystack[from..].find(needle) {
        let at = from + found;
        let end = at + needle.len();
        let left_ok = haystack[..at].chars().next_back().is_none_or(|c| !is_token_char(c));
        let right_ok = haystack[end..].chars().next().is_none_or(|c| !is_token_char(c));
        if left_ok && right_ok {
            return true;
        }
        from = at + needle.len().max(1);
    }
    false
}

fn matches_rule(pred: &str, gold: &str, rule: ScoreRule) -> bool {
    let pred = fold(pred, rule.case_mode);
    let gold = fold(gold, rule.case_mode);
    if rule.containment {
        contains_token_bounded(&pred, &gold)
    } else {
        pred.trim() == gold.trim()
    }
}

pub fn score_string_match(pred: &str, gold: &str, rule: ScoreRule) -> Verdict {
    if matches_rule(pred, gold, rule) {
        Verdict::from_score(1.0, format!("matched {gold:?}"))
    } else {
        Verdict::from_score(0.0, format!("expected {gold:?}"))
    }
}

pub fn score_recall(pred: &str, gold: &[String], rule: ScoreRule) -> Result<Verdict, ScoreError> {
    if gold.is_empty() {
        return Err(ScoreError::EmptyGold);
    }
    let matched: Vec<&str> = gold
        .iter()
        .filter(|g| matches_rule(pred, g, rule))
        .map(String::as_str)
        .collect();
    let score = matched.len() as f64 / gold.len() as f64;
    Ok(Verdict::from_score(
        score,
        format!("matched {} of {}: [{}]", matched.len(), gold.len(), matched.join(", ")),
    ))
}

pub fn score_genome_alignment(pred: &str, gold: &GenomeLocus) -> Verdict {
    let Some(parsed) = parse_genome_locus(pred) else {
        return Verdict::from_score(0.0, "unparsed");
    };
    if parsed.chromosome() != gold.chromosome() {
        return Verdict::from_score(
            0.0,
            format!("chromosome {} != {}", parsed.chromosome(), gold.chromosome()),
        );
    }
    if parsed.start() == gold.start() && parsed.end() == gold.end() {
        Verdict::from_score(1.0, "exact locus")
    } else {
        Verdict::from_score(0.5, "chromosome correct, coordinates differ")
    }
}

/// Common-name to synonym table for species answers. Gold answers use the
/// benchmark's common names; predictions may use binomial or taxonomy names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeciesMap {
    map: BTreeMap<String, Vec<String>>,
}

impl SpeciesMap {
    /// The table shipped with the crate, covering the benchmark's
    /// multi-species answer set.
    pub fn builtin() -> Self {
        serde_json::from_str(include_str!("../../../../data/species_map.json"))
            .expect("shipped species table parses")
    }

    pub fn load(path: &Path) -> Result<Self, ScoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScoreError::SpeciesTable(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| ScoreError::SpeciesTable(format!("{}: {e}", path.display())))
    }

    pub fn from_entries(entries: &[(&str, &[&str])]) -> Self {
        SpeciesMap {
            map: entries
                .iter()
                .map(|(name, synonyms)| {
                    (name.to_string(), synonyms.iter().map(|s| s.to_string()).collect())
                })
                .collect(),
        }
    }

    /// All names that count as this species: the common name itself plus
    /// its synonyms.
    pub fn names_for(&self, common_name: &str) -> Result<Vec<String>, ScoreError> {
        let key = common_name.trim().to_lowercase();
        let synonyms =
            self.map.get(&key).ok_or_else(|| ScoreError::UnknownSpecies(key.clone()))?;
        let mut names = vec![key];
        names.extend(synonyms.iter().cloned());
        Ok(names)
    }
}

pub fn score_species(
    pred: &str,
    gold_common_name: &str,
    species: &SpeciesMap,
    rule: ScoreRule,
) -> Result<Verdict, ScoreError> {
    let names = species.names_for(gold_common_name)?;
    for name in &names {
        if matches_rule(pred, name, rule) {
            return Ok(Verdict::from_score(
                1.0,
                format!("matched {name:?} for {gold_common_name:?}"),
            ));
        }
    }
    Ok(Verdict::from_score(0.0, format!("no name of {gold_common_name:?} found")))
}

/// Phrasings that mean "yes, protein-coding". Checked only after no
/// negative phrasing matched.
const AFFIRMATIVE: &[&str] = &["true", "yes", "protein-coding", "protein coding", "coding"];
/// Phrasings that mean "no / not protein-coding". `na` is the benchmark's
/// own negative label.
const NEGATIVE: &[&str] = &[
    "na",
    "n/a",
    "no",
    "false",
    "not",
    "pseudogene",
    "non-coding",
    "noncoding",
    "non-protein",
];

/// Maps free text onto the benchmark's binary label set.
pub fn binary_label(pred: &str) -> Option<&'static str> {
    let folded = pred.to_lowercase();
    for phrase in NEGATIVE {
        if contains_token_bounded(&folded, phrase) {
            return Some("NA");
        }
    }
    for phrase in AFFIRMATIVE {
        if contains_token_bounded(&folded, phrase) {
            return Some("TRUE");
        }
    }
    None
}

pub fn score_binary(pred: &str, gold: &str) -> Result<Verdict, ScoreError> {
    let gold = gold.trim().to_uppercase();
    if gold != "TRUE" && gold != "NA" {
        return Err(ScoreError::BadBinaryGold(gold));
    }
    match binary_label(pred) {
        Some(label) if label == gold => {
            Ok(Verdict::from_score(1.0, format!("mapped to {label}")))
        }
        Some(label) => Ok(Verdict::from_score(0.0, format!("mapped to {label}, expected {gold}"))),
        None => Ok(Verdict::from_score(0.0, "unmapped")),
    }
}

/// Grades one item under its task's rule. `JudgeSemantic` items cannot be
/// graded here; the caller either runs the judge or marks them unscored.
pub fn score_item(
    task: TaskKind,
    pred: &str,
    gold: &GoldAnswer,
    species: &SpeciesMap,
) -> Result<Verdict, ScoreError> {
    score_item_with_rule(task, rule_for_task(task), pred, gold, species)
}

pub fn score_item_with_rule(
    task: TaskKind,
    rule: ScoreRule,
    pred: &str,
    gold: &GoldAnswer,
    species: &SpeciesMap,
) -> Result<Verdict, ScoreError> {
    let shape_error = |expected: &'static str, found: &'static str| ScoreError::GoldShape {
        task,
        expected,
        found,
    };
    match rule.kind {
        ScoreRuleKind::StringMatch => match gold {
            GoldAnswer::SingleString(g) => Ok(score_string_match(pred, g, rule)),
            other => Err(shape_error("single string", gold_shape(other))),
        },
        ScoreRuleKind::Recall => match gold {
            GoldAnswer::StringSet(set) => score_recall(pred, set, rule),
            other => Err(shape_error("string set", gold_shape(other))),
        },
        ScoreRuleKind::GenomeAlignmentHalfCredit => match gold {
            GoldAnswer::GenomeLocus(locus) => Ok(score_genome_alignment(pred, locus)),
            other => Err(shape_error("genome locus", gold_shape(other))),
        },
        ScoreRuleKind::SpeciesMap => match gold {
            GoldAnswer::SpeciesName(name) => score_species(pred, name, species, rule),
            other => Err(shape_error("species name", gold_shape(other))),
        },
        ScoreRuleKind::BinaryMap => match gold {
            GoldAnswer::SingleString(g) => score_binary(pred, g),
            other => Err(shape_error("binary label", gold_shape(other))),
        },
        ScoreRuleKind::JudgeSemantic => Err(ScoreError::NeedsJudge(task)),
    }
}

fn gold_shape(gold: &GoldAnswer) -> &'static str {
    match gold {
        GoldAnswer::SingleString(_) => "single string",
        GoldAnswer::StringSet(_) => "string set",
        GoldAnswer::GenomeLocus(_) => "genome locus",
        GoldAnswer::SpeciesName(_) => "species name",
        GoldAnswer::FreeText(_) => "free text",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_rule() -> ScoreRule {
        ScoreRule::new(ScoreRuleKind::StringMatch)
    }

    fn check_string(pred: &str, gold: &str, expected: f64) {
        let verdict = score_string_match(pred, gold, default_rule());
        assert_eq!(verdict.score, expected, "pred {pred:?} gold {gold:?}");
    }

    #[test]
    fn string_match_identity_and_prose_hits() {
        check_string("PSMB10", "PSMB10", 1.0);
        check_string("the symbol is psmb10.", "PSMB10", 1.0);
        check_string("Answer is PSMB10, also called LMP10", "PSMB10", 1.0);
        check_string("PSMB10.", "PSMB10", 1.0);
        check_string("(PSMB10)", "PSMB10", 1.0);
        check_string("psmb10", "PSMB10", 1.0);
        check_string("The official symbol is PSMB10", "psmb10", 1.0);
        check_string("chr12", "chr12", 1.0);
        check_string("located on chr12.", "chr12", 1.0);
        check_string("rs1217074595", "rs1217074595", 1.0);
    }

    #[test]
    fn string_match_rejects_token_fragments() {
        // A fused symbol names a different gene than either half.
        check_string("GALNT4", "POC1B-GALNT4", 0.0);
        check_string("POC1B-GALNT4", "GALNT4", 0.0);
        check_string("PSMB100", "PSMB10", 0.0);
        check_string("XPSMB10", "PSMB10", 0.0);
        check_string("PSM", "PSMB10", 0.0);
        check_string("completely wrong", "PSMB10", 0.0);
        check_string("", "PSMB10", 0.0);
        check_string("chr123", "chr12", 0.0);
        check_string("rs12170745950", "rs1217074595", 0.0);
    }

    #[test]
    fn strict_mode_requires_whole_span_equality() {
        let strict = ScoreRule::strict(ScoreRuleKind::StringMatch);
        assert_eq!(score_string_match("PSMB10", "PSMB10", strict).score, 1.0);
        assert_eq!(score_string_match(" PSMB10 ", "PSMB10", strict).score, 1.0);
        assert_eq!(score_string_match("psmb10", "PSMB10", strict).score, 0.0);
        assert_eq!(score_string_match("the symbol is PSMB10", "PSMB10", strict).score, 0.0);
    }

    #[test]
    fn recall_counts_matched_gold_elements() {
        let gold = vec!["BRCA1".to_string(), "BRCA2".to_string(), "TP53".to_string()];
        let rule = ScoreRule::new(ScoreRuleKind::Recall);
        let hit_two = score_recall("BRCA1 and brca2 are implicated", &gold, rule).unwrap();
        assert!((hit_two.score - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(hit_two.bucket, Bucket::Half);
        let hit_all =
            score_recall("BRCA1, BRCA2 and TP53 are all implicated", &gold, rule).unwrap();
        assert_eq!(hit_all.score, 1.0);
        assert_eq!(hit_all.bucket, Bucket::Correct);
        let hit_none = score_recall("no genes found", &gold, rule).unwrap();
        assert_eq!(hit_none.score, 0.0);
        assert_eq!(hit_none.bucket, Bucket::Error);
        let single = score_recall("only FMR1", &["FMR1".to_string()], rule).unwrap();
        assert_eq!(single.score, 1.0);
        assert!(matches!(score_recall("x", &[], rule), Err(ScoreError::EmptyGold)));
    }

    #[test]
    fn genome_alignment_half_credit() {
        let gold = GenomeLocus::with_range("chr15", 91_950_805, 91_950_932).unwrap();
        assert_eq!(score_genome_alignment("chr15:91950805-91950932", &gold).score, 1.0);
        assert_eq!(
            score_genome_alignment("the region is chr15:91,950,805-91,950,932", &gold).score,
            1.0
        );
        assert_eq!(score_genome_alignment("chr15:91000000-91000100", &gold).score, 0.5);
        assert_eq!(score_genome_alignment("chromosome 15", &gold).score, 0.5);
        assert_eq!(score_genome_alignment("chr15", &gold).score, 0.5);
        assert_eq!(score_genome_alignment("chr12:5-10", &gold).score, 0.0);
        assert_eq!(score_genome_alignment("chrX:91950805-91950932", &gold).score, 0.0);
        let unparsed = score_genome_alignment("no location found", &gold);
        assert_eq!(unparsed.score, 0.0);
        assert_eq!(unparsed.detail, "unparsed");
    }

    fn test_species() -> SpeciesMap {
        SpeciesMap::from_entries(&[
            ("rat", &["rattus norvegicus", "norway rat", "brown rat"]),
            ("worm", &["caenorhabditis elegans", "c. elegans", "roundworm", "nematode"]),
            ("chicken", &["gallus gallus", "red junglefowl"]),
            ("zebrafish", &["danio rerio"]),
        ])
    }

    #[test]
    fn species_mapping_accepts_synonyms() {
        let species = test_species();
        let rule = ScoreRule::new(ScoreRuleKind::SpeciesMap);
        let hit = |pred: &str, gold: &str| {
            score_species(pred, gold, &species, rule).unwrap().score
        };
        assert_eq!(hit("Rattus norvegicus", "rat"), 1.0);
        assert_eq!(hit("the sequence is from the Norway rat", "rat"), 1.0);
        assert_eq!(hit("rat", "rat"), 1.0);
        assert_eq!(hit("C. elegans", "worm"), 1.0);
        assert_eq!(hit("Gallus gallus", "chicken"), 1.0);
        assert_eq!(hit("zebrafish", "chicken"), 0.0);
        assert_eq!(hit("Danio rerio", "zebrafish"), 1.0);
        assert_eq!(hit("some unknown organism", "worm"), 0.0);
        assert!(matches!(
            score_species("anything", "axolotl", &species, rule),
            Err(ScoreError::UnknownSpecies(_))
        ));
    }

    #[test]
    fn shipped_species_table_parses_and_covers_the_basics() {
        let species = SpeciesMap::builtin();
        let rule = ScoreRule::new(ScoreRuleKind::SpeciesMap);
        for (gold, pred) in [
            ("rat", "Rattus norvegicus"),
            ("worm", "C. elegans"),
            ("chicken", "Gallus gallus"),
            ("zebrafish", "Danio rerio"),
            ("mouse", "Mus musculus"),
            ("yeast", "Saccharomyces cerevisiae"),
        ] {
            assert_eq!(
                score_species(pred, gold, &species, rule).unwrap().score,
                1.0,
                "gold {gold:?} pred {pred:?}"
            );
        }
    }

    #[test]
    fn binary_mapping_of_phrasings() {
        let hit = |pred: &str, gold: &str| score_binary(pred, gold).unwrap().score;
        assert_eq!(hit("TRUE", "TRUE"), 1.0);
        assert_eq!(hit("Yes, it is a protein-coding gene", "TRUE"), 1.0);
        assert_eq!(hit("This gene is protein coding.", "TRUE"), 1.0);
        assert_eq!(hit("true", "TRUE"), 1.0);
        assert_eq!(hit("NA", "NA"), 1.0);
        assert_eq!(hit("it is a pseudogene, not protein-coding", "NA"), 1.0);
        assert_eq!(hit("No, this is a non-coding RNA gene", "NA"), 1.0);
        assert_eq!(hit("n/a", "NA"), 1.0);
        assert_eq!(hit("NA", "TRUE"), 0.0);
        assert_eq!(hit("Yes, protein-coding", "NA"), 0.0);
        let unmapped = score_binary("unknown", "TRUE").unwrap();
        assert_eq!(unmapped.score, 0.0);
        assert_eq!(unmapped.detail, "unmapped");
        assert!(matches!(score_binary("x", "MAYBE"), Err(ScoreError::BadBinaryGold(_))));
    }

    #[test]
    fn binary_negatives_win_over_embedded_positives() {
        // "not protein-coding" contains the affirmative word "protein-coding";
        // the negative context must decide.
        assert_eq!(binary_label("it is not protein-coding"), Some("NA"));
        assert_eq!(binary_label("this is DNA"), None);
        assert_eq!(binary_label("nothing definite"), None);
    }

    #[test]
    fn every_task_has_exactly_one_rule() {
        for task in TaskKind::ALL {
            let rule = rule_for_task(task);
            match task {
                TaskKind::HumanGenomeDnaAlignment => {
                    assert_eq!(rule.kind, ScoreRuleKind::GenomeAlignmentHalfCredit)
                }
                TaskKind::MultiSpeciesDnaAlignment => {
                    assert_eq!(rule.kind, ScoreRuleKind::SpeciesMap)
                }
                TaskKind::ProteinCodingGenes => assert_eq!(rule.kind, ScoreRuleKind::BinaryMap),
                TaskKind::SnpGeneFunction => assert_eq!(rule.kind, ScoreRuleKind::JudgeSemantic),
                TaskKind::GeneDiseaseAssociation
                | TaskKind::DiseaseGeneLocation
                | TaskKind::SequenceGeneAlias => assert_eq!(rule.kind, ScoreRuleKind::Recall),
                _ => assert_eq!(rule.kind, ScoreRuleKind::StringMatch),
            }
        }
    }

    #[test]
    fn score_item_dispatches_and_checks_gold_shape() {
        let species = test_species();
        let verdict = score_item(
            TaskKind::GeneAlias,
            "the answer is PSMB10",
            &GoldAnswer::SingleString("PSMB10".to_string()),
            &species,
        )
        .unwrap();
        assert_eq!(verdict.score, 1.0);
        let mismatch = score_item(
            TaskKind::GeneAlias,
            "x",
            &GoldAnswer::StringSet(vec!["a".to_string()]),
            &species,
        );
        assert!(matches!(mismatch, Err(ScoreError::GoldShape { .. })));
        let judged = score_item(
            TaskKind::SnpGeneFunction,
            "x",
            &GoldAnswer::FreeText("y".to_string()),
            &species,
        );
        assert!(matches!(judged, Err(ScoreError::NeedsJudge(TaskKind::SnpGeneFunction))));
    }

    proptest! {
        #[test]
        fn bucket_always_follows_score(score in 0.0f64..=1.0) {
            let verdict = Verdict::from_score(score, "p");
            match verdict.bucket {
                Bucket::Correct => prop_assert!(verdict.score >= 1.0),
                Bucket::Error => prop_assert!(verdict.score <= 0.0),
                Bucket::Half => prop_assert!(verdict.score > 0.0 && verdict.score < 1.0),
            }
        }

        #[test]
        fn recall_is_monotone_in_matched_elements(
            matched in proptest::collection::vec("[A-Z]{3,6}[0-9]{0,2}", 1..5),
            unmatched in proptest::collection::vec("[A-Z]{3,6}[0-9]{0,2}", 0..4),
            extra in "[A-Z]{3,6}[0-9]{1,2}",
        ) {
            let rule = ScoreRule::new(ScoreRuleKind::Recall);
            let pred = matched.join(" and ");
            let mut gold: Vec<String> = matched.clone();
            gold.extend(unmatched.iter().cloned());
            gold.dedup();
            let base = score_recall(&pred, &gold, rule).unwrap().score;
            // Mentioning one more gold element never lowers the score.
            let mut wider_gold = gold.clone();
            wider_gold.push(extra.clone());
            let richer_pred = format!("{pred} and {extra}");
            let richer = score_recall(&richer_pred, &wider_gold, rule).unwrap().score;
            let baseline = score_recall(&pred, &wider_gold, rule).unwrap().score;
            prop_assert!(richer >= baseline - 1e-12);
            let _ = base;
        }

        #[test]
        fn half_credit_needs_the_same_chromosome(
            chr_a in 1u64..=22, chr_b in 1u64..=22,
            start in 1u64..1_000_000, len in 1u64..10_000,
        ) {
            let gold = GenomeLocus::with_range(&format!("chr{chr_a}"), start, start + len).unwrap();
            let pred = format!("chr{chr_b}:{}-{}", start + 7, start + len + 7);
            let verdict = score_genome_alignment(&pred, &gold);
            if chr_a == chr_b {
                prop_assert_eq!(verdict.score, 0.5);
            } else {
                prop_assert_eq!(verdict.score, 0.0);
            }
        }
    }
}
