//! Google Programmable Search client used as the fallback retrieval path.

use crate::domain::{canonicalize_params, AgentKind, ToolResult};
use crate::transport::eutils::run_tool_request;
use crate::transport::{HttpRequestSpec, Transport, TransportError, TransportMode};
use serde::{Deserialize, Serialize};

pub const SEARCH_BASE: &str = "https://www.googleapis.com/customsearch/v1";

/// Fixed result depth: the top results only.
pub const SEARCH_RESULT_COUNT: u32 = 5;

/// One search result. Every field is metadata taken verbatim from the
/// API response; anything absent stays `None` rather than being scraped.
/// A hit carries at least one of title and summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub title: Option<String>,
    pub source: Option<String>,
    pub date: Option<String>,
    pub author: Option<String>,
    pub summary: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum WebSearchError {
    #[error("web search needs GOOGLE_CSE_KEY and GOOGLE_CSE_ID outside replay mode")]
    MissingCredentials,
    #[error("search API rejected the request with status {status}: {message}")]
    Api { status: u16, message: String },
    #[error(transparent)]
    Transport(#[from] TransportError),
}

pub fn search_url(query: &str) -> (String, String) {
    let params = [
        ("q".to_string(), query.trim().to_string()),
        ("num".to_string(), SEARCH_RESULT_COUNT.to_string()),
    ];
    let canonical = canonicalize_params(&params);
    (format!("{SEARCH_BASE}?{canonical}"), canonical)
}

/// Runs one query and returns up to five hits together with the
/// ToolResult carrying the raw (truncated) response body. Credentials
/// travel as secret parameters: appended only for real network calls,
/// absent from fixtures and traces.
pub fn web_search(
    transport: &Transport,
    query: &str,
    credentials: Option<(&str, &str)>,
) -> Result<(Vec<SearchHit>, ToolResult), WebSearchError> {
    let (url, canonical) = search_url(query);
    let mut spec = HttpRequestSpec::get(&url);
    match credentials {
        Some((key, cx)) => {
            spec.secret_params.push(("key".to_string(), key.to_string()));
            spec.secret_params.push(("cx".to_string(), cx.to_string()));
        }
        None if transport.mode() != TransportMode::Replay => {
            return Err(WebSearchError::MissingCredentials);
        }
        None => {}
    }
    let result = run_tool_request(transport, AgentKind::WebSearch, spec, canonical)?;
    if let Some(status) = failure_status(&result) {
        let message = result.parsed["error"]["message"]
            .as_str()
            .map(str::to_string)
            .unwrap_or_else(|| result.raw_response.chars().take(200).collect());
        return Err(WebSearchError::Api { status, message });
    }
    let hits = parse_hits(&result.parsed);
    Ok((hits, result))
}

fn failure_status(result: &ToolResult) -> Option<u16> {
    let code = result.parsed["error"]["code"].as_u64()?;
    u16::try_from(code).ok()
}

fn parse_hits(body: &serde_json::Value) -> Vec<SearchHit> {
    let Some(items) = body["items"].as_array() else {
        return Vec::new();
    };
    items
        .iter()
        .filter_map(parse_hit)
        .take(SEARCH_RESULT_COUNT as usize)
        .collect()
}

fn parse_hit(item: &serde_json::Value) -> Option<SearchHit> {
    let meta = &item["pagemap"]["metatags"][0];
    let title = non_empty(item["title"].as_str());
    let summary = non_empty(item["snippet"].as_str());
    if title.is_none() && summary.is_none() {
        return None;
    }
    let source = non_empty(item["displayLink"].as_str())
        .or_else(|| non_empty(meta["og:site_name"].as_str()));
    let date = ["article:published_time", "og:updated_time", "date"]
        .iter()
        .find_map(|key| non_empty(meta[*key].as_str()));
    let author = ["author", "article:author"]
        .iter()
        .find_map(|key| non_empty(meta[*key].as_str()));
    let keywords = ["news_keywords", "keywords"]
        .iter()
        .find_map(|key| non_empty(meta[*key].as_str()))
        .map(|list| {
            list.split(',')
                .map(|k| k.trim().to_string())
                .filter(|k| !k.is_empty())
                .collect()
        })
        .unwrap_or_default();
    Some(SearchHit { title, source, date, author, summary, keywords })
}

fn non_empty(value: Option<&str>) -> Option<String> {
    value.map(str::trim).filter(|v| !v.is_empty()).map(str::to_string)
}
