//! Token-bucket rate limiting over an injectable clock.

use crate::clock::Clock;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Sustained request rate plus allowed burst. The bucket holds at most
/// `burst` tokens, so any one-second window sees at most
/// `max_requests_per_second + burst` requests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateLimit {
    pub max_requests_per_second: f64,
    pub burst: u32,
}

impl RateLimit {
    /// NCBI usage policy: 3 requests per second without an API key, 10
    /// with one.
    pub fn ncbi(api_key_present: bool) -> Self {
        let rate = if api_key_present { 10.0 } else { 3.0 };
        RateLimit { max_requests_per_second: rate, burst: rate as u32 }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.max_requests_per_second > 0.0) {
            return Err(format!(
                "max_requests_per_second must be positive, got {}",
                self.max_requests_per_second
            ));
        }
        if self.burst == 0 {
            return Err("burst must be positive".to_string());
        }
        Ok(())
    }
}

impl Default for RateLimit {
    fn default() -> Self {
        RateLimit::ncbi(false)
    }
}

/// Classic token bucket: starts full, refills continuously, sleeps via the
/// clock when empty.
pub struct TokenBucket {
    limit: RateLimit,
    tokens: f64,
    last_refill: DateTime<Utc>,
}

impl TokenBucket {
    pub fn new(limit: RateLimit, now: DateTime<Utc>) -> Self {
        TokenBucket { limit, tokens: limit.burst as f64, last_refill: now }
    }

    fn refill(&mut self, now: DateTime<Utc>) {
        let elapsed = (now - self.last_refill).num_milliseconds().max(0) as f64 / 1000.0;
        self.tokens = (self.tokens + elapsed * self.limit.max_requests_per_second)
            .min(self.limit.burst as f64);
        self.last_refill = now;
    }

    /// Blocks (via the clock) until a token is available, then takes it.
    pub fn acquire(&mut self, clock: &dyn Clock) {
        loop {
            self.refill(clock.now());
            if self.tokens >= 1.0 {
                self.tokens -= 1.0;
                return;
            }
            let deficit = 1.0 - self.tokens;
            let wait_ms =
                (deficit / self.limit.max_requests_per_second * 1000.0).ceil().max(1.0) as u64;
            clock.sleep(Duration::from_millis(wait_ms));
        }
    }
}
