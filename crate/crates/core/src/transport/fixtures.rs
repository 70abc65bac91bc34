//! On-disk HTTP fixtures for record/replay.
//!
//! A fixture is keyed by a hash of the request method and URL. When the
//! same request recurs within a run and the response changed (BLAST status
//! polls), later recordings get an occurrence suffix: `<hash>.json`,
//! `<hash>-2.json`, `<hash>-3.json`. Replay prefers the exact occurrence
//! and falls back to the base recording, so a request repeated more often
//! at replay time than at record time still resolves.

use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRequest {
    pub method: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub request: FixtureRequest,
    pub status: u16,
    #[serde(default)]
    pub content_type: Option<String>,
    pub body_b64: String,
    pub recorded_at: String,
}

impl FixtureRecord {
    pub fn body(&self) -> Result<Vec<u8>, FixtureError> {
        base64::engine::general_purpose::STANDARD
            .decode(&self.body_b64)
            .map_err(|err| FixtureError::Corrupt(err.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("fixture io: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture file is corrupt: {0}")]
    Corrupt(String),
}

/// Directory of fixture files.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Stable request identity: first 16 hex characters of
    /// SHA-256(method + " " + url).
    pub fn key(method: &str, url: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(method.as_bytes());
        hasher.update(b" ");
        hasher.update(url.as_bytes());
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    fn path_for(&self, key: &str, occurrence: u32) -> PathBuf {
        if occurrence <= 1 {
            self.dir.join(format!("{key}.json"))
        } else {
            self.dir.join(format!("{key}-{occurrence}.json"))
        }
    }

    /// Loads the fixture for the given occurrence of a request, falling
    /// back to the base recording when no occurrence-specific file exists.
    pub fn load(
        &self,
        method: &str,
        url: &str,
        occurrence: u32,
    ) -> Result<Option<FixtureRecord>, FixtureError> {
        let key = FixtureStore::key(method, url);
        for path in [self.path_for(&key, occurrence), self.path_for(&key, 1)] {
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    let record: FixtureRecord = serde_json::from_str(&text)
                        .map_err(|err| FixtureError::Corrupt(format!("{}: {err}", path.display())))?;
                    return Ok(Some(record));
                }
                Err(err) if err.kind() == std::io::ErrorKind::NotFound => continue,
                Err(err) => return Err(err.into()),
            }
        }
        Ok(None)
    }

    /// Persists a response atomically (write-temp-then-rename). A repeat
    /// occurrence identical to the base recording is skipped rather than
    /// duplicated.
    pub fn store(
        &self,
        method: &str,
        url: &str,
        occurrence: u32,
        status: u16,
        content_type: Option<&str>,
        body: &[u8],
        recorded_at: &str,
    ) -> Result<PathBuf, FixtureError> {
        std::fs::create_dir_all(&self.dir)?;
        let key = FixtureStore::key(method, url);
        let record = FixtureRecord {
            request: FixtureRequest { method: method.to_string(), url: url.to_string() },
            status,
            content_type: content_type.map(str::to_string),
            body_b64: base64::engine::general_purpose::STANDARD.encode(body),
            recorded_at: recorded_at.to_string(),
        };
        if occurrence > 1 {
            if let Some(base) = self.load(method, url, 1)? {
                if base.status == status && base.body_b64 == record.body_b64 {
                    return Ok(self.path_for(&key, 1));
                }
            }
        }
        let path = self.path_for(&key, occurrence);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&record).expect("records serialize"))?;
        std::fs::rename(&tmp, &path)?;
        Ok(path)
    }
}
