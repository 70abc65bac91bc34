//! Rate-limited HTTP transport with record/replay fixtures, plus
//! protocol clients for NCBI E-utilities, BLAST and web search.

mod blast;
mod eutils;
mod fixtures;
mod rate_limit;
mod websearch;

pub use blast::{BlastClient, BlastConfig, BlastError, BlastReport, BlastStatus, BLAST_BASE};
pub use eutils::{
    build_eutils_url, eutils_execute, EutilsCall, EutilsDb, EutilsError, EutilsFunction,
    EUTILS_BASE,
};
pub use fixtures::{FixtureError, FixtureRecord, FixtureRequest, FixtureStore};
pub use rate_limit::{RateLimit, TokenBucket};
pub use websearch::{search_url, web_search, SearchHit, WebSearchError, SEARCH_BASE};

use crate::clock::Clock;
use chrono::SecondsFormat;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    Live,
    Record,
    Replay,
}

/// Default cap applied to response bodies before they reach any model
/// context or ToolResult.
pub const DEFAULT_BYTE_CAP: usize = 16 * 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportConfig {
    pub mode: TransportMode,
    #[serde(default)]
    pub fixture_dir: Option<PathBuf>,
    #[serde(default)]
    pub rate_limit: RateLimit,
    #[serde(default = "default_byte_cap")]
    pub byte_cap: usize,
}

fn default_byte_cap() -> usize {
    DEFAULT_BYTE_CAP
}

impl TransportConfig {
    pub fn replay(fixture_dir: impl Into<PathBuf>) -> Self {
        TransportConfig {
            mode: TransportMode::Replay,
            fixture_dir: Some(fixture_dir.into()),
            rate_limit: RateLimit::default(),
            byte_cap: DEFAULT_BYTE_CAP,
        }
    }

    pub fn record(fixture_dir: impl Into<PathBuf>) -> Self {
        TransportConfig { mode: TransportMode::Record, ..TransportConfig::replay(fixture_dir) }
    }

    pub fn live() -> Self {
        TransportConfig {
            mode: TransportMode::Live,
            fixture_dir: None,
            rate_limit: RateLimit::default(),
            byte_cap: DEFAULT_BYTE_CAP,
        }
    }
}

/// One HTTP request. `secret_params` (API keys) are appended only when the
/// request goes over the network; they never enter fixture identity or
/// recorded files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequestSpec {
    pub method: String,
    pub url: String,
    pub secret_params: Vec<(String, String)>,
}

impl HttpRequestSpec {
    pub fn get(url: impl Into<String>) -> Self {
        HttpRequestSpec { method: "GET".to_string(), url: url.into(), secret_params: Vec::new() }
    }

    fn effective_url(&self) -> String {
        if self.secret_params.is_empty() {
            return self.url.clone();
        }
        let mut serializer = url::form_urlencoded::Serializer::new(String::new());
        for (k, v) in &self.secret_params {
            serializer.append_pair(k, v);
        }
        let joiner = if self.url.contains('?') { '&' } else { '?' };
        format!("{}{}{}", self.url, joiner, serializer.finish())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
    pub from_fixture: bool,
}

impl HttpResponse {
    /// Body as text, lossily decoded and truncated to the cap.
    pub fn text_capped(&self, cap: usize) -> String {
        truncate_to_cap(&self.body, cap)
    }
}

pub fn truncate_to_cap(body: &[u8], cap: usize) -> String {
    let text = String::from_utf8_lossy(body);
    if text.len() <= cap {
        return text.into_owned();
    }
    let mut cut = cap;
    while cut > 0 && !text.is_char_boundary(cut) {
        cut -= 1;
    }
    format!("{}\n[truncated {} of {} bytes]", &text[..cut], text.len() - cut, text.len())
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("transport configuration error: {0}")]
    Config(String),
    #[error("no fixture for request {hash} ({method} {url})")]
    FixtureMiss { hash: String, method: String, url: String },
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error("network failure for {url}: {message}")]
    Network { url: String, message: String },
    #[error("{url} returned status {status}: {body_excerpt}")]
    Status { url: String, status: u16, body_excerpt: String },
}

/// HTTP execution with three modes:
///
/// * Live - network, rate-limited, bounded retries.
/// * Record - Live plus persisting every response before returning it.
/// * Replay - fixtures only; never opens a network connection.
///
/// Counters make those guarantees checkable: `network_ops` counts real
/// network attempts, `executed_requests` counts completed `execute` calls
/// in any mode.
pub struct Transport {
    config: TransportConfig,
    store: Option<FixtureStore>,
    clock: Arc<dyn Clock>,
    limiter: Mutex<TokenBucket>,
    occurrences: Mutex<HashMap<String, u32>>,
    network_ops: AtomicU64,
    executed: AtomicU64,
    agent: OnceLock<ureq::Agent>,
}

const MAX_NETWORK_ATTEMPTS: u32 = 3;
const RETRY_PAUSE: Duration = Duration::from_millis(1000);
const MAX_BODY_BYTES: u64 = 8 * 1024 * 1024;

impl Transport {
    pub fn new(config: TransportConfig, clock: Arc<dyn Clock>) -> Result<Self, TransportError> {
        config.rate_limit.validate().map_err(TransportError::Config)?;
        let store = match config.mode {
            TransportMode::Live => None,
            TransportMode::Record | TransportMode::Replay => {
                let dir = config.fixture_dir.clone().ok_or_else(|| {
                    TransportError::Config(format!(
                        "{:?} mode needs a fixture directory",
                        config.mode
                    ))
                })?;
                if config.mode == TransportMode::Replay && !dir.is_dir() {
                    return Err(TransportError::Config(format!(
                        "fixture directory {} does not exist",
                        dir.display()
                    )));
                }
                Some(FixtureStore::new(dir))
            }
        };
        let limiter = Mutex::new(TokenBucket::new(config.rate_limit, clock.now()));
        Ok(Transport {
            config,
            store,
            clock,
            limiter,
            occurrences: Mutex::new(HashMap::new()),
            network_ops: AtomicU64::new(0),
            executed: AtomicU64::new(0),
            agent: OnceLock::new(),
        })
    }

    pub fn mode(&self) -> TransportMode {
        self.config.mode
    }

    pub fn byte_cap(&self) -> usize {
        self.config.byte_cap
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    pub fn clock_arc(&self) -> Arc<dyn Clock> {
        Arc::clone(&self.clock)
    }

    /// Real network attempts made (0 in Replay mode, always).
    pub fn network_ops(&self) -> u64 {
        self.network_ops.load(Ordering::SeqCst)
    }

    /// Requests served through `execute`, whatever the mode.
    pub fn executed_requests(&self) -> u64 {
        self.executed.load(Ordering::SeqCst)
    }

    pub fn execute(&self, spec: &HttpRequestSpec) -> Result<HttpResponse, TransportError> {
        let key = FixtureStore::key(&spec.method, &spec.url);
        let occurrence = {
            let mut map = self.occurrences.lock().unwrap();
            let counter = map.entry(key.clone()).or_insert(0);
            *counter += 1;
            *counter
        };
        let response = match self.config.mode {
            TransportMode::Replay => {
                let store = self.store.as_ref().expect("replay mode has a store");
                match store.load(&spec.method, &spec.url, occurrence)? {
                    Some(record) => HttpResponse {
                        status: record.status,
                        content_type: record.content_type.clone(),
                        body: record.body()?,
                        from_fixture: true,
                    },
                    None => {
                        return Err(TransportError::FixtureMiss {
                            hash: key,
                            method: spec.method.clone(),
                            url: spec.url.clone(),
                        })
                    }
                }
            }
            TransportMode::Live | TransportMode::Record => {
                let response = self.fetch_with_retries(spec)?;
                if let Some(store) = &self.store {
                    let recorded_at =
                        self.clock.now().to_rfc3339_opts(SecondsFormat::Secs, true);
                    store.store(
                        &spec.method,
                        &spec.url,
                        occurrence,
                        response.status,
                        response.content_type.as_deref(),
                        &response.body,
                        &recorded_at,
                    )?;
                }
                response
            }
        };
        self.executed.fetch_add(1, Ordering::SeqCst);
        Ok(response)
    }

    fn fetch_with_retries(&self, spec: &HttpRequestSpec) -> Result<HttpResponse, TransportError> {
        let mut last_error = None;
        for attempt in 0..MAX_NETWORK_ATTEMPTS {
            if attempt > 0 {
                self.clock.sleep(RETRY_PAUSE);
            }
            self.limiter.lock().unwrap().acquire(self.clock.as_ref());
            self.network_ops.fetch_add(1, Ordering::SeqCst);
            match self.fetch_once(spec) {
                Ok(response) if response.status >= 500 => {
                    last_error = Some(TransportError::Status {
                        url: spec.url.clone(),
                        status: response.status,
                        body_excerpt: truncate_to_cap(&response.body, 200),
                    });
                }
                Ok(response) => return Ok(response),
                Err(err) => last_error = Some(err),
            }
        }
        Err(last_error.expect("at least one attempt ran"))
    }

    fn fetch_once(&self, spec: &HttpRequestSpec) -> Result<HttpResponse, TransportError> {
        let agent = self.agent.get_or_init(|| {
            ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(60)))
                .http_status_as_error(false)
                .build()
                .into()
        });
        let url = spec.effective_url();
        let result = match spec.method.as_str() {
            "GET" => agent.get(&url).call(),
            other => {
                return Err(TransportError::Config(format!(
                    "unsupported http method {other}"
                )))
            }
        };
        let mut response = result.map_err(|err| TransportError::Network {
            url: spec.url.clone(),
            message: err.to_string(),
        })?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = response
            .body_mut()
            .with_config()
            .limit(MAX_BODY_BYTES)
            .read_to_vec()
            .map_err(|err| TransportError::Network {
                url: spec.url.clone(),
                message: err.to_string(),
            })?;
        Ok(HttpResponse { status, content_type, body, from_fixture: false })
    }
}
