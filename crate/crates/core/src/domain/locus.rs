//! Genome locus parsing and normalisation.
//!
//! Model output mentions chromosomes in many shapes: `chr7:5530601-5530629`,
//! `chromosome 12`, `Xq28`, `chr17:43,044,295-43,170,245`. The parser maps
//! all of them to a canonical [`GenomeLocus`] so alignment answers can be
//! compared with half credit for chromosome-only matches.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A chromosome plus an optional coordinate range on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenomeLocus {
    chromosome: String,
    start: Option<u64>,
    end: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LocusError {
    #[error("invalid chromosome {0:?}, expected 1-22, X, Y or M")]
    InvalidChromosome(String),
    #[error("locus range is inverted: start {start} > end {end}")]
    InvertedRange { start: u64, end: u64 },
    #[error("locus has an end coordinate {0} but no start")]
    EndWithoutStart(u64),
}

impl GenomeLocus {
    /// Builds a locus, normalising the chromosome name and rejecting
    /// inverted ranges.
    pub fn new(
        chromosome: &str,
        start: Option<u64>,
        end: Option<u64>,
    ) -> Result<Self, LocusError> {
        let chromosome = normalize_chromosome(chromosome)
            .ok_or_else(|| LocusError::InvalidChromosome(chromosome.to_string()))?;
        match (start, end) {
            (Some(s), Some(e)) if s > e => return Err(LocusError::InvertedRange { start: s, end: e }),
            (None, Some(e)) => return Err(LocusError::EndWithoutStart(e)),
            _ => {}
        }
        Ok(GenomeLocus { chromosome, start, end })
    }

    pub fn chromosome_only(chromosome: &str) -> Result<Self, LocusError> {
        GenomeLocus::new(chromosome, None, None)
    }

    pub fn with_range(chromosome: &str, start: u64, end: u64) -> Result<Self, LocusError> {
        GenomeLocus::new(chromosome, Some(start), Some(end))
    }

    pub fn chromosome(&self) -> &str {
        &self.chromosome
    }

    pub fn start(&self) -> Option<u64> {
        self.start
    }

    pub fn end(&self) -> Option<u64> {
        self.end
    }

    pub fn has_range(&self) -> bool {
        self.start.is_some()
    }
}

impl fmt::Display for GenomeLocus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.start, self.end) {
            (Some(s), Some(e)) => write!(f, "{}:{}-{}", self.chromosome, s, e),
            (Some(s), None) => write!(f, "{}:{}", self.chromosome, s),
            _ => f.write_str(&self.chromosome),
        }
    }
}

/// Maps a chromosome spelled any common way to canonical `chrN` form.
/// Returns `None` for names outside 1-22, X, Y, M.
pub fn normalize_chromosome(raw: &str) -> Option<String> {
    let mut token = raw.trim();
    let lower = token.to_ascii_lowercase();
    if let Some(rest) = lower.strip_prefix("chromosome") {
        token = token[token.len() - rest.len()..].trim_start_matches([' ', ':', '=', '#']);
    } else if let Some(rest) = lower.strip_prefix("chr") {
        token = token[token.len() - rest.len()..].trim_start_matches([' ', ':', '=', '#']);
    }
    let token = token.trim().trim_end_matches('.');
    match token.to_ascii_uppercase().as_str() {
        "X" => return Some("chrX".to_string()),
        "Y" => return Some("chrY".to_string()),
        "M" | "MT" => return Some("chrM".to_string()),
        _ => {}
    }
    let n: u64 = token.parse().ok()?;
    if (1..=22).contains(&n) {
        Some(format!("chr{n}"))
    } else {
        None
    }
}

/// Extracts the first genome locus mentioned in free text.
///
/// Understands `chr`/`chromosome` prefixes, bare cytogenetic bands like
/// `12p13.31`, coordinate ranges with commas, and a bare chromosome token
/// when it is the entire text. An inverted range degrades to a
/// chromosome-only locus rather than failing the whole parse.
pub fn parse_genome_locus(text: &str) -> Option<GenomeLocus> {
    let bytes = text.as_bytes();
    let lower = text.to_ascii_lowercase();

    let mut i = 0;
    while let Some(found) = lower[i..].find("chr") {
        let at = i + found;
        i = at + 3;
        if at > 0 && bytes[at - 1].is_ascii_alphanumeric() {
            continue;
        }
        let after = if lower[at..].starts_with("chromosome") {
            at + "chromosome".len()
        } else {
            at + 3
        };
        if let Some(locus) = read_locus_at(text, after) {
            return Some(locus);
        }
    }

    if let Some(locus) = find_bare_cytoband(text) {
        return Some(locus);
    }

    let whole = text.trim().trim_end_matches('.');
    normalize_chromosome(whole)
        .map(|c| GenomeLocus { chromosome: c, start: None, end: None })
}

/// Reads a chromosome token (and optional coordinates) starting right after
/// a `chr`/`chromosome` prefix.
fn read_locus_at(text: &str, mut pos: usize) -> Option<GenomeLocus> {
    let bytes = text.as_bytes();
    while pos < bytes.len() && matches!(bytes[pos], b' ' | b':' | b'=' | b'#') {
        // A colon both separates "chromosome: 7" and introduces coordinates
        // in "chr7:100"; only skip it while no chromosome token was read.
        pos += 1;
    }
    let start = pos;
    let name = if pos < bytes.len() && bytes[pos].is_ascii_digit() {
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        let n: u64 = text[start..pos].parse().ok()?;
        if !(1..=22).contains(&n) {
            return None;
        }
        format!("chr{n}")
    } else {
        match bytes.get(pos).map(u8::to_ascii_uppercase) {
            Some(b'X') => {
                pos += 1;
                "chrX".to_string()
            }
            Some(b'Y') => {
                pos += 1;
                "chrY".to_string()
            }
            Some(b'M') => {
                pos += 1;
                if bytes.get(pos).map(u8::to_ascii_uppercase) == Some(b'T') {
                    pos += 1;
                }
                "chrM".to_string()
            }
            _ => return None,
        }
    };

    // Reject tokens that run into more letters ("christmas"), but allow a
    // cytogenetic band suffix like chr12q13.2.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_alphabetic() => {
            if matches!(b.to_ascii_lowercase(), b'p' | b'q') {
                pos += 1;
                while pos < bytes.len()
                    && (bytes[pos].is_ascii_digit() || bytes[pos] == b'.')
                {
                    pos += 1;
                }
                return Some(GenomeLocus { chromosome: name, start: None, end: None });
            }
            return None;
        }
        _ => {}
    }

    let (start_coord, end_coord) = read_range(text, pos);
    match (start_coord, end_coord) {
        (Some(s), Some(e)) if s > e => {
            Some(GenomeLocus { chromosome: name, start: None, end: None })
        }
        (s, e) => Some(GenomeLocus { chromosome: name, start: s, end: e }),
    }
}

/// Reads an optional `:start-end` coordinate suffix; digit groups may
/// contain commas.
fn read_range(text: &str, mut pos: usize) -> (Option<u64>, Option<u64>) {
    let bytes = text.as_bytes();
    if bytes.get(pos) != Some(&b':') {
        return (None, None);
    }
    pos += 1;
    while bytes.get(pos) == Some(&b' ') {
        pos += 1;
    }
    let (first, next) = match read_number(text, pos) {
        Some(v) => v,
        None => return (None, None),
    };
    pos = next;
    while bytes.get(pos) == Some(&b' ') {
        pos += 1;
    }
    if bytes.get(pos) != Some(&b'-') {
        return (Some(first), None);
    }
    pos += 1;
    while bytes.get(pos) == Some(&b' ') {
        pos += 1;
    }
    match read_number(text, pos) {
        Some((second, _)) => (Some(first), Some(second)),
        None => (Some(first), None),
    }
}

/// Parses a digit group that may contain thousands separators. Returns the
/// value and the index just past it.
fn read_number(text: &str, mut pos: usize) -> Option<(u64, usize)> {
    let bytes = text.as_bytes();
    let mut digits = String::new();
    let start = pos;
    while pos < bytes.len() {
        match bytes[pos] {
            b'0'..=b'9' => digits.push(bytes[pos] as char),
            b',' if pos > start && bytes.get(pos + 1).is_some_and(u8::is_ascii_digit) => {}
            _ => break,
        }
        pos += 1;
    }
    if digits.is_empty() {
        return None;
    }
    digits.parse().ok().map(|v| (v, pos))
}

/// Finds a standalone cytogenetic band like `12p13.31` or `Xq28`.
fn find_bare_cytoband(text: &str) -> Option<GenomeLocus> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if i > 0 && bytes[i - 1].is_ascii_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        let mut j = i;
        while j < bytes.len() && bytes[j].is_ascii_digit() && j - start < 2 {
            j += 1;
        }
        let arm = if j > start {
            j
        } else if matches!(bytes.get(i).map(u8::to_ascii_uppercase), Some(b'X') | Some(b'Y')) {
            i + 1
        } else {
            i += 1;
            continue;
        };
        if matches!(bytes.get(arm).map(u8::to_ascii_lowercase), Some(b'p') | Some(b'q'))
            && bytes.get(arm + 1).is_some_and(u8::is_ascii_digit)
        {
            if let Some(chromosome) = normalize_chromosome(&text[start..arm]) {
                return Some(GenomeLocus { chromosome, start: None, end: None });
            }
        }
        i += 1;
    }
    None
}
