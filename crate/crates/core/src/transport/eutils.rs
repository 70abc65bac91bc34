//! NCBI E-utilities requests: normalisation, URL construction, execution.

use crate::clock::Clock;
use crate::domain::{canonicalize_params, AgentKind, ToolInvocation, ToolResult};
use crate::transport::{HttpRequestSpec, Transport, TransportError};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const EUTILS_BASE: &str = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/";

pub const DEFAULT_RETMAX: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EutilsFunction {
    ESearch,
    EFetch,
    ESummary,
}

impl EutilsFunction {
    pub fn endpoint(&self) -> &'static str {
        match self {
            EutilsFunction::ESearch => "esearch.fcgi",
            EutilsFunction::EFetch => "efetch.fcgi",
            EutilsFunction::ESummary => "esummary.fcgi",
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EutilsFunction::ESearch => "esearch",
            EutilsFunction::EFetch => "efetch",
            EutilsFunction::ESummary => "esummary",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "esearch" => Some(EutilsFunction::ESearch),
            "efetch" => Some(EutilsFunction::EFetch),
            "esummary" => Some(EutilsFunction::ESummary),
            _ => None,
        }
    }
}

impl fmt::Display for EutilsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EutilsDb {
    Gene,
    Snp,
    Omim,
    Other(String),
}

impl EutilsDb {
    pub fn as_str(&self) -> &str {
        match self {
            EutilsDb::Gene => "gene",
            EutilsDb::Snp => "snp",
            EutilsDb::Omim => "omim",
            EutilsDb::Other(name) => name,
        }
    }

    pub fn parse(raw: &str) -> Self {
        match raw.trim().to_ascii_lowercase().as_str() {
            "gene" => EutilsDb::Gene,
            "snp" => EutilsDb::Snp,
            "omim" => EutilsDb::Omim,
            other => EutilsDb::Other(other.to_string()),
        }
    }
}

impl fmt::Display for EutilsDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EutilsError {
    #[error("esearch needs a term")]
    MissingTerm,
    #[error("{0} needs at least one id")]
    MissingIds(EutilsFunction),
}

/// One E-utilities request before normalisation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EutilsCall {
    pub function: EutilsFunction,
    pub db: EutilsDb,
    #[serde(default)]
    pub term: Option<String>,
    #[serde(default)]
    pub ids: Vec<String>,
    #[serde(default)]
    pub retmax: Option<u32>,
}

impl EutilsCall {
    pub fn search(db: EutilsDb, term: impl Into<String>) -> Self {
        EutilsCall {
            function: EutilsFunction::ESearch,
            db,
            term: Some(term.into()),
            ids: Vec::new(),
            retmax: None,
        }
    }

    pub fn summary(db: EutilsDb, ids: Vec<String>) -> Self {
        EutilsCall { function: EutilsFunction::ESummary, db, term: None, ids, retmax: None }
    }

    pub fn fetch(db: EutilsDb, ids: Vec<String>) -> Self {
        EutilsCall { function: EutilsFunction::EFetch, db, term: None, ids, retmax: None }
    }

    pub fn validate(&self) -> Result<(), EutilsError> {
        match self.function {
            EutilsFunction::ESearch => {
                if self.term.as_deref().map_or(true, |t| t.trim().is_empty()) {
                    return Err(EutilsError::MissingTerm);
                }
            }
            EutilsFunction::EFetch | EutilsFunction::ESummary => {
                if self.ids.is_empty() {
                    return Err(EutilsError::MissingIds(self.function));
                }
            }
        }
        Ok(())
    }

    /// Normalised parameter list: `retmode=json` and `sort=relevance` are
    /// always present, `retmax` (default 5) only on esearch.
    pub fn params(&self) -> Vec<(String, String)> {
        let mut params = vec![
            ("db".to_string(), self.db.as_str().to_string()),
            ("retmode".to_string(), "json".to_string()),
            ("sort".to_string(), "relevance".to_string()),
        ];
        match self.function {
            EutilsFunction::ESearch => {
                if let Some(term) = &self.term {
                    params.push(("term".to_string(), term.clone()));
                }
                let retmax = self.retmax.unwrap_or(DEFAULT_RETMAX);
                params.push(("retmax".to_string(), retmax.to_string()));
            }
            EutilsFunction::EFetch | EutilsFunction::ESummary => {
                params.push(("id".to_string(), self.ids.join(",")));
            }
        }
        params
    }

    pub fn canonical_params(&self) -> String {
        canonicalize_params(&self.params())
    }
}

/// Full request URL: endpoint plus canonically ordered query string.
pub fn build_eutils_url(call: &EutilsCall) -> String {
    format!("{}{}?{}", EUTILS_BASE, call.function.endpoint(), call.canonical_params())
}

/// Runs one validated E-utilities call through the transport and packages
/// the outcome for the conversation state. `api_key` rides along as a
/// secret parameter so it never shows up in fixtures or traces.
pub fn eutils_execute(
    transport: &Transport,
    call: &EutilsCall,
    api_key: Option<&str>,
) -> Result<Result<ToolResult, TransportError>, EutilsError> {
    call.validate()?;
    let url = build_eutils_url(call);
    let mut spec = HttpRequestSpec::get(&url);
    if let Some(key) = api_key {
        spec.secret_params.push(("api_key".to_string(), key.to_string()));
    }
    Ok(run_tool_request(transport, AgentKind::Eutils, spec, call.canonical_params()))
}

/// Shared execution path for tool agents: measures latency on the
/// transport clock, truncates the body to the byte cap, and parses JSON
/// bodies opportunistically.
pub(crate) fn run_tool_request(
    transport: &Transport,
    agent: AgentKind,
    spec: HttpRequestSpec,
    canonical_params: String,
) -> Result<ToolResult, TransportError> {
    let clock: &dyn Clock = transport.clock();
    let start = clock.now();
    let response = transport.execute(&spec)?;
    let end = clock.now();
    let latency_ms = (end - start).num_milliseconds().max(0) as u64;
    let raw_response = response.text_capped(transport.byte_cap());
    let parsed: serde_json::Value =
        serde_json::from_slice(&response.body).unwrap_or(serde_json::Value::Null);
    Ok(ToolResult {
        invocation: ToolInvocation { agent, method: spec.method, url: spec.url, canonical_params },
        raw_response,
        parsed,
        latency_ms,
        from_cache: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::FakeClock;
    use crate::transport::{FixtureStore, TransportConfig};
    use std::sync::Arc;

    #[test]
    fn esearch_url_matches_the_wire_format() {
        let call = EutilsCall::search(EutilsDb::Gene, "LMP10");
        assert_eq!(
            build_eutils_url(&call),
            "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi\
             ?db=gene&retmax=5&retmode=json&sort=relevance&term=LMP10"
        );
    }

    #[test]
    fn esummary_url_matches_the_wire_format() {
        let call = EutilsCall::summary(EutilsDb::Snp, vec!["1217074595".to_string()]);
        assert_eq!(
            build_eutils_url(&call),
            "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esummary.fcgi\
             ?db=snp&id=1217074595&retmode=json&sort=relevance"
        );
    }

    #[test]
    fn retmax_applies_only_to_esearch() {
        let mut search = EutilsCall::search(EutilsDb::Gene, "BRCA2");
        search.retmax = Some(20);
        assert!(search.canonical_params().contains("retmax=20"));

        let mut summary = EutilsCall::summary(EutilsDb::Gene, vec!["675".to_string()]);
        summary.retmax = Some(20);
        assert!(!summary.canonical_params().contains("retmax"));

        let mut fetch = EutilsCall::fetch(EutilsDb::Omim, vec!["114480".to_string()]);
        fetch.retmax = Some(20);
        assert!(!fetch.canonical_params().contains("retmax"));
    }

    #[test]
    fn multiple_ids_join_with_a_comma() {
        let call = EutilsCall::summary(EutilsDb::Gene, vec!["5699".to_string(), "675".to_string()]);
        assert!(call.canonical_params().contains("id=5699%2C675"));
    }

    #[test]
    fn validation_rejects_incomplete_calls() {
        let mut call = EutilsCall::search(EutilsDb::Gene, " ");
        assert_eq!(call.validate(), Err(EutilsError::MissingTerm));
        call.term = None;
        assert_eq!(call.validate(), Err(EutilsError::MissingTerm));

        let call = EutilsCall::summary(EutilsDb::Snp, Vec::new());
        assert_eq!(call.validate(), Err(EutilsError::MissingIds(EutilsFunction::ESummary)));
        let call = EutilsCall::fetch(EutilsDb::Snp, Vec::new());
        assert_eq!(call.validate(), Err(EutilsError::MissingIds(EutilsFunction::EFetch)));
    }

    #[test]
    fn db_parse_keeps_unknown_names() {
        assert_eq!(EutilsDb::parse("Gene"), EutilsDb::Gene);
        assert_eq!(EutilsDb::parse("protein"), EutilsDb::Other("protein".to_string()));
        assert_eq!(EutilsDb::parse("protein").as_str(), "protein");
    }

    #[test]
    fn execute_packages_a_tool_result() {
        let dir = tempfile::tempdir().unwrap();
        let call = EutilsCall::search(EutilsDb::Gene, "LMP10");
        let url = build_eutils_url(&call);
        FixtureStore::new(dir.path())
            .store(
                "GET",
                &url,
                1,
                200,
                Some("application/json"),
                br#"{"esearchresult":{"idlist":["5699"]}}"#,
                "t",
            )
            .unwrap();

        let transport =
            Transport::new(TransportConfig::replay(dir.path()), Arc::new(FakeClock::new()))
                .unwrap();
        let result = eutils_execute(&transport, &call, Some("secret-key")).unwrap().unwrap();
        assert_eq!(result.invocation.agent, AgentKind::Eutils);
        assert_eq!(result.invocation.url, url);
        assert!(!result.invocation.url.contains("secret-key"));
        assert_eq!(result.invocation.canonical_params, call.canonical_params());
        assert_eq!(result.parsed["esearchresult"]["idlist"][0], "5699");
        assert!(result.latency_ms > 0);
        assert!(!result.from_cache);
    }

    #[test]
    fn execute_rejects_invalid_calls_before_any_io() {
        let dir = tempfile::tempdir().unwrap();
        let transport =
            Transport::new(TransportConfig::replay(dir.path()), Arc::new(FakeClock::new()))
                .unwrap();
        let call = EutilsCall::summary(EutilsDb::Gene, Vec::new());
        assert!(eutils_execute(&transport, &call, None).is_err());
        assert_eq!(transport.executed_requests(), 0);
    }

    #[test]
    fn non_json_bodies_parse_to_null() {
        let dir = tempfile::tempdir().unwrap();
        let call = EutilsCall::fetch(EutilsDb::Omim, vec!["114480".to_string()]);
        let url = build_eutils_url(&call);
        FixtureStore::new(dir.path())
            .store("GET", &url, 1, 200, Some("text/plain"), b"*114480 BREAST CANCER", "t")
            .unwrap();
        let transport =
            Transport::new(TransportConfig::replay(dir.path()), Arc::new(FakeClock::new()))
                .unwrap();
        let result = eutils_execute(&transport, &call, None).unwrap().unwrap();
        assert_eq!(result.parsed, serde_json::Value::Null);
        assert!(result.raw_response.contains("BREAST CANCER"));
    }
}
