//! BLAST URL API client: submit, poll, align with run-level deduplication.
//!
//! The URL API is asynchronous. A Put request returns a request id (RID)
//! inside a QBlastInfo comment block; the result is then polled with Get
//! requests until the job leaves WAITING. Polling runs on the injected
//! clock so the schedule is testable without real waiting.

use crate::domain::{canonicalize_params, DnaSequence};
use crate::transport::{truncate_to_cap, Transport, TransportError};
use crate::transport::HttpRequestSpec;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

pub const BLAST_BASE: &str = "https://blast.ncbi.nlm.nih.gov/Blast.cgi";
pub const BLAST_PROGRAM: &str = "blastn";
pub const BLAST_DATABASE: &str = "nt";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlastState {
    Unsubmitted,
    Waiting,
    Ready,
    Failed,
    TimedOut,
}

/// One tracked submission. The rid is present exactly when the job has
/// been submitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlastJob {
    pub sequence: DnaSequence,
    pub rid: Option<String>,
    pub state: BlastState,
}

/// Outcome of one poll.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlastStatus {
    Waiting,
    /// Alignment report with the QBlastInfo bookkeeping stripped,
    /// truncated to the transport byte cap.
    Ready(String),
    /// FAILED or UNKNOWN status word from the service.
    Failed(String),
}

#[derive(Debug, thiserror::Error)]
pub enum BlastError {
    #[error("submission response carried no RID: {body_excerpt}")]
    MissingRid { body_excerpt: String },
    #[error("poll response carried no readable status: {body_excerpt}")]
    MalformedStatus { body_excerpt: String },
    #[error("job {rid} reported status {status}")]
    JobFailed { rid: String, status: String },
    #[error("job {rid} still waiting after {polls} polls")]
    TimedOut { rid: String, polls: u32 },
    #[error(transparent)]
    Transport(#[from] TransportError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlastConfig {
    pub poll_interval: Duration,
    /// Extra polls after the first one.
    pub max_poll_retries: u32,
}

impl Default for BlastConfig {
    fn default() -> Self {
        BlastConfig { poll_interval: Duration::from_secs(10), max_poll_retries: 3 }
    }
}

/// A finished alignment, ready to be packaged as a ToolResult.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlastReport {
    pub rid: String,
    pub report: String,
    /// Submission URL; identifies the work done.
    pub url: String,
    pub canonical_params: String,
    pub latency_ms: u64,
    pub polls: u32,
    pub from_cache: bool,
}

pub struct BlastClient {
    transport: Arc<Transport>,
    config: BlastConfig,
    jobs: Mutex<HashMap<String, BlastJob>>,
    reports: Mutex<HashMap<String, BlastReport>>,
    align_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl BlastClient {
    pub fn new(transport: Arc<Transport>, config: BlastConfig) -> Self {
        BlastClient {
            transport,
            config,
            jobs: Mutex::new(HashMap::new()),
            reports: Mutex::new(HashMap::new()),
            align_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn submit_url(sequence: &DnaSequence) -> (String, String) {
        let params = [
            ("CMD".to_string(), "Put".to_string()),
            ("PROGRAM".to_string(), BLAST_PROGRAM.to_string()),
            ("DATABASE".to_string(), BLAST_DATABASE.to_string()),
            ("QUERY".to_string(), sequence.as_str().to_string()),
        ];
        let canonical = canonicalize_params(&params);
        (format!("{BLAST_BASE}?{canonical}"), canonical)
    }

    pub fn poll_url(rid: &str) -> String {
        let params = [("CMD".to_string(), "Get".to_string()), ("RID".to_string(), rid.to_string())];
        format!("{BLAST_BASE}?{}", canonicalize_params(&params))
    }

    pub fn job(&self, sequence: &DnaSequence) -> Option<BlastJob> {
        self.jobs.lock().unwrap().get(sequence.as_str()).cloned()
    }

    /// Submits the sequence, or returns the RID already obtained for it
    /// this run without touching the network.
    pub fn submit(&self, sequence: &DnaSequence) -> Result<String, BlastError> {
        if let Some(job) = self.jobs.lock().unwrap().get(sequence.as_str()) {
            if let Some(rid) = &job.rid {
                return Ok(rid.clone());
            }
        }
        let (url, _) = BlastClient::submit_url(sequence);
        let response = self.transport.execute(&HttpRequestSpec::get(url))?;
        let body = response.text_capped(usize::MAX);
        let rid = qblast_info(&body)
            .and_then(|info| info.get("RID").cloned())
            .ok_or_else(|| BlastError::MissingRid { body_excerpt: truncate_to_cap(body.as_bytes(), 200) })?;
        self.jobs.lock().unwrap().insert(
            sequence.as_str().to_string(),
            BlastJob { sequence: sequence.clone(), rid: Some(rid.clone()), state: BlastState::Waiting },
        );
        Ok(rid)
    }

    /// One Get poll. Does not sleep; `align` owns the schedule.
    pub fn poll(&self, rid: &str) -> Result<BlastStatus, BlastError> {
        let response = self.transport.execute(&HttpRequestSpec::get(BlastClient::poll_url(rid)))?;
        let body = response.text_capped(usize::MAX);
        let info = qblast_info(&body).ok_or_else(|| BlastError::MalformedStatus {
            body_excerpt: truncate_to_cap(body.as_bytes(), 200),
        })?;
        let status = info.get("Status").ok_or_else(|| BlastError::MalformedStatus {
            body_excerpt: truncate_to_cap(body.as_bytes(), 200),
        })?;
        match status.to_ascii_uppercase().as_str() {
            "WAITING" => Ok(BlastStatus::Waiting),
            "READY" => {
                let report = strip_qblast_info(&body);
                Ok(BlastStatus::Ready(truncate_to_cap(report.as_bytes(), self.transport.byte_cap())))
            }
            other => Ok(BlastStatus::Failed(other.to_string())),
        }
    }

    /// Submit then poll on the 10-second schedule until READY, at most
    /// `max_poll_retries` retries after the first poll. An alignment
    /// already completed this run is returned from cache with zero
    /// latency and no network traffic.
    pub fn align(&self, sequence: &DnaSequence) -> Result<BlastReport, BlastError> {
        self.align_observed(sequence, |_, _, _| {})
    }

    /// `align` with an observer invoked once per operation: the name
    /// (`blast_submit`, `blast_poll`, `blast_report`), the request URL,
    /// and whether the result was served without network traffic. Lets
    /// callers log the exact request schedule.
    pub fn align_observed(
        &self,
        sequence: &DnaSequence,
        mut observe: impl FnMut(&str, &str, bool),
    ) -> Result<BlastReport, BlastError> {
        let latch = {
            let mut locks = self.align_locks.lock().unwrap();
            Arc::clone(locks.entry(sequence.as_str().to_string()).or_default())
        };
        let _guard = latch.lock().unwrap();

        if let Some(cached) = self.reports.lock().unwrap().get(sequence.as_str()) {
            let mut report = cached.clone();
            report.from_cache = true;
            report.latency_ms = 0;
            observe("blast_report", &report.url, true);
            return Ok(report);
        }

        let clock = self.transport.clock_arc();
        let start = clock.now();
        let rid_reused = self
            .jobs
            .lock()
            .unwrap()
            .get(sequence.as_str())
            .is_some_and(|job| job.rid.is_some());
        let rid = self.submit(sequence)?;
        let (submit_url, _) = BlastClient::submit_url(sequence);
        observe("blast_submit", &submit_url, rid_reused);
        let poll_url = BlastClient::poll_url(&rid);
        let max_polls = 1 + self.config.max_poll_retries;
        let mut polls = 0;
        loop {
            clock.sleep(self.config.poll_interval);
            polls += 1;
            let status = self.poll(&rid)?;
            observe("blast_poll", &poll_url, false);
            match status {
                BlastStatus::Waiting => {
                    if polls >= max_polls {
                        self.set_state(sequence, BlastState::TimedOut);
                        return Err(BlastError::TimedOut { rid, polls });
                    }
                }
                BlastStatus::Ready(text) => {
                    let latency_ms = (clock.now() - start).num_milliseconds().max(0) as u64;
                    let (url, canonical_params) = BlastClient::submit_url(sequence);
                    let report = BlastReport {
                        rid,
                        report: text,
                        url,
                        canonical_params,
                        latency_ms,
                        polls,
                        from_cache: false,
                    };
                    self.set_state(sequence, BlastState::Ready);
                    self.reports
                        .lock()
                        .unwrap()
                        .insert(sequence.as_str().to_string(), report.clone());
                    return Ok(report);
                }
                BlastStatus::Failed(status) => {
                    self.set_state(sequence, BlastState::Failed);
                    return Err(BlastError::JobFailed { rid, status });
                }
            }
        }
    }

    fn set_state(&self, sequence: &DnaSequence, state: BlastState) {
        if let Some(job) = self.jobs.lock().unwrap().get_mut(sequence.as_str()) {
            job.state = state;
        }
    }
}

/// Key/value pairs from every QBlastInfo comment block in the body.
fn qblast_info(body: &str) -> Option<HashMap<String, String>> {
    let mut found = false;
    let mut info = HashMap::new();
    let mut rest = body;
    while let Some(begin) = rest.find("QBlastInfoBegin") {
        let after = &rest[begin + "QBlastInfoBegin".len()..];
        let end = after.find("QBlastInfoEnd").unwrap_or(after.len());
        for line in after[..end].lines() {
            if let Some((key, value)) = line.split_once('=') {
                info.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        found = true;
        rest = &after[end..];
    }
    if found {
        Some(info)
    } else {
        None
    }
}

/// Body with every QBlastInfo comment block removed: the report the
/// model is allowed to see.
fn strip_qblast_info(body: &str) -> String {
    let mut out = String::new();
    let mut rest = body;
    while let Some(begin) = rest.find("<!--QBlastInfoBegin") {
        out.push_str(&rest[..begin]);
        match rest[begin..].find("-->") {
            Some(close) => rest = &rest[begin + close + 3..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    out.trim().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::{Clock, FakeClock};
    use crate::transport::{FixtureStore, TransportConfig};

    const SEQ: &str = "ATTCTGCCTTTAGTAATTTGATGACAGAGACTTCTTGGGAACCACAGCCAGGGAGCCACC";

    fn put_body(rid: &str) -> String {
        format!(
            "<html>\n<!--QBlastInfoBegin\n    RID = {rid}\n    RTOE = 25\nQBlastInfoEnd\n-->\n</html>"
        )
    }

    fn waiting_body() -> String {
        "<html>\n<!--QBlastInfoBegin\n\tStatus=WAITING\nQBlastInfoEnd\n-->\n</html>".to_string()
    }

    fn ready_body(report: &str) -> String {
        format!(
            "<!--QBlastInfoBegin\n\tStatus=READY\nQBlastInfoEnd\n-->\n{report}"
        )
    }

    struct Setup {
        _dir: tempfile::TempDir,
        transport: Arc<Transport>,
        clock: Arc<FakeClock>,
    }

    /// Lays down fixtures for one submission returning `rid` followed by
    /// the given poll statuses, in order.
    fn setup(rid: &str, polls: &[&str]) -> Setup {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path());
        let sequence = DnaSequence::parse(SEQ).unwrap();
        let (put_url, _) = BlastClient::submit_url(&sequence);
        store.store("GET", &put_url, 1, 200, Some("text/html"), put_body(rid).as_bytes(), "t").unwrap();
        let poll_url = BlastClient::poll_url(rid);
        for (idx, status) in polls.iter().enumerate() {
            let body = match *status {
                "WAITING" => waiting_body(),
                "READY" => ready_body("Sequences producing significant alignments:\nHomo sapiens chromosome 15"),
                "FAILED" => "<!--QBlastInfoBegin\n\tStatus=FAILED\nQBlastInfoEnd\n-->".to_string(),
                other => other.to_string(),
            };
            store
                .store("GET", &poll_url, (idx + 1) as u32, 200, Some("text/html"), body.as_bytes(), "t")
                .unwrap();
        }
        let clock = Arc::new(FakeClock::new());
        let transport = Arc::new(
            Transport::new(TransportConfig::replay(dir.path()), clock.clone()).unwrap(),
        );
        Setup { _dir: dir, transport, clock }
    }

    fn sequence() -> DnaSequence {
        DnaSequence::parse(SEQ).unwrap()
    }

    #[test]
    fn submit_parses_rid_from_qblast_info() {
        let setup = setup("ABC123", &[]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        assert_eq!(client.submit(&sequence()).unwrap(), "ABC123");
        let job = client.job(&sequence()).unwrap();
        assert_eq!(job.state, BlastState::Waiting);
        assert_eq!(job.rid.as_deref(), Some("ABC123"));
    }

    #[test]
    fn duplicate_submit_reuses_the_rid_without_http() {
        let setup = setup("ABC123", &[]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        client.submit(&sequence()).unwrap();
        let before = setup.transport.executed_requests();
        assert_eq!(client.submit(&sequence()).unwrap(), "ABC123");
        assert_eq!(setup.transport.executed_requests(), before);
    }

    #[test]
    fn submit_without_rid_is_a_protocol_error() {
        let dir = tempfile::tempdir().unwrap();
        let (put_url, _) = BlastClient::submit_url(&sequence());
        FixtureStore::new(dir.path())
            .store("GET", &put_url, 1, 200, None, b"<html>maintenance page</html>", "t")
            .unwrap();
        let transport = Arc::new(
            Transport::new(TransportConfig::replay(dir.path()), Arc::new(FakeClock::new()))
                .unwrap(),
        );
        let client = BlastClient::new(transport, BlastConfig::default());
        let err = client.submit(&sequence()).unwrap_err();
        assert!(matches!(err, BlastError::MissingRid { ref body_excerpt } if body_excerpt.contains("maintenance")));
    }

    #[test]
    fn align_ready_first_poll_takes_ten_seconds() {
        let setup = setup("R1", &["READY"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let start = setup.clock.now();
        let report = client.align(&sequence()).unwrap();
        assert!(report.report.contains("Homo sapiens chromosome 15"));
        assert!(!report.report.contains("QBlastInfo"));
        assert_eq!(report.polls, 1);
        assert!(!report.from_cache);
        assert_eq!(setup.clock.sleeps(), vec![Duration::from_secs(10)]);
        assert!(setup.clock.elapsed_secs(start) >= 10.0);
        assert_eq!(setup.transport.executed_requests(), 2);
    }

    #[test]
    fn align_waits_through_waiting_polls() {
        let setup = setup("R2", &["WAITING", "READY"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let start = setup.clock.now();
        let report = client.align(&sequence()).unwrap();
        assert_eq!(report.polls, 2);
        assert_eq!(
            setup.clock.sleeps(),
            vec![Duration::from_secs(10), Duration::from_secs(10)]
        );
        let elapsed = setup.clock.elapsed_secs(start);
        assert!((20.0..21.0).contains(&elapsed), "elapsed {elapsed}");
        assert_eq!(setup.transport.executed_requests(), 3);
    }

    #[test]
    fn align_times_out_after_four_waiting_polls() {
        let setup = setup("R3", &["WAITING", "WAITING", "WAITING", "WAITING"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let err = client.align(&sequence()).unwrap_err();
        match err {
            BlastError::TimedOut { rid, polls } => {
                assert_eq!(rid, "R3");
                assert_eq!(polls, 4);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert_eq!(setup.transport.executed_requests(), 5);
        assert_eq!(setup.clock.sleeps().len(), 4);
        assert_eq!(client.job(&sequence()).unwrap().state, BlastState::TimedOut);
    }

    #[test]
    fn align_surfaces_job_failure() {
        let setup = setup("R4", &["WAITING", "FAILED"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let err = client.align(&sequence()).unwrap_err();
        assert!(matches!(err, BlastError::JobFailed { ref status, .. } if status == "FAILED"));
        assert_eq!(client.job(&sequence()).unwrap().state, BlastState::Failed);
    }

    #[test]
    fn repeated_align_serves_the_cached_report() {
        let setup = setup("R5", &["READY"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let first = client.align(&sequence()).unwrap();
        let before = setup.transport.executed_requests();
        let second = client.align(&sequence()).unwrap();
        assert!(second.from_cache);
        assert_eq!(second.latency_ms, 0);
        assert_eq!(second.report, first.report);
        assert_eq!(setup.transport.executed_requests(), before);
        assert_eq!(setup.clock.sleeps().len(), 1);
    }

    #[test]
    fn observer_sees_each_operation_in_order() {
        let setup = setup("R6", &["WAITING", "READY"]);
        let client = BlastClient::new(setup.transport.clone(), BlastConfig::default());
        let mut ops: Vec<(String, bool)> = Vec::new();
        client
            .align_observed(&sequence(), |op, _, from_cache| {
                ops.push((op.to_string(), from_cache));
            })
            .unwrap();
        assert_eq!(
            ops,
            vec![
                ("blast_submit".to_string(), false),
                ("blast_poll".to_string(), false),
                ("blast_poll".to_string(), false),
            ]
        );

        ops.clear();
        client
            .align_observed(&sequence(), |op, _, from_cache| {
                ops.push((op.to_string(), from_cache));
            })
            .unwrap();
        assert_eq!(ops, vec![("blast_report".to_string(), true)]);
    }

    #[test]
    fn garbage_poll_body_is_a_protocol_error() {
        let dir = tempfile::tempdir().unwrap();
        FixtureStore::new(dir.path())
            .store("GET", &BlastClient::poll_url("RX"), 1, 200, None, b"<html>oops</html>", "t")
            .unwrap();
        let transport = Arc::new(
            Transport::new(TransportConfig::replay(dir.path()), Arc::new(FakeClock::new()))
                .unwrap(),
        );
        let client = BlastClient::new(transport, BlastConfig::default());
        assert!(matches!(client.poll("RX"), Err(BlastError::MalformedStatus { .. })));
    }

    #[test]
    fn qblast_info_parses_spaced_and_tabbed_forms() {
        let info = qblast_info(&put_body("XYZ")).unwrap();
        assert_eq!(info.get("RID").map(String::as_str), Some("XYZ"));
        assert_eq!(info.get("RTOE").map(String::as_str), Some("25"));
        let info = qblast_info(&waiting_body()).unwrap();
        assert_eq!(info.get("Status").map(String::as_str), Some("WAITING"));
        assert!(qblast_info("<html>nothing here</html>").is_none());
    }

    #[test]
    fn report_strips_bookkeeping_blocks() {
        let body = format!("{}\nalignment lines", ready_body("ignored"));
        let stripped = strip_qblast_info(&body);
        assert!(!stripped.contains("QBlastInfo"));
        assert!(stripped.contains("alignment lines"));
    }
}
