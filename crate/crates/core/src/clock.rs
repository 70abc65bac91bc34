//! Injectable time source.
//!
//! Everything that reads the time or sleeps goes through [`Clock`] so that
//! polling schedules, rate limiting, latencies and trace timestamps are
//! exactly reproducible under test.

use chrono::{DateTime, TimeZone, Utc};
use std::sync::Mutex;
use std::time::Duration;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
    fn sleep(&self, duration: Duration);
}

/// Wall-clock time and real sleeping.
#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Deterministic clock for tests and replay runs.
///
/// Every `now()` call advances time by one millisecond so consecutive
/// events never share a timestamp; `sleep` advances by the requested
/// duration without blocking.
pub struct FakeClock {
    current: Mutex<DateTime<Utc>>,
    slept: Mutex<Vec<Duration>>,
}

impl FakeClock {
    pub fn new() -> Self {
        FakeClock::starting_at(Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap())
    }

    pub fn starting_at(start: DateTime<Utc>) -> Self {
        FakeClock { current: Mutex::new(start), slept: Mutex::new(Vec::new()) }
    }

    /// Durations passed to `sleep`, in order. Lets tests assert polling
    /// schedules without real waiting.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.slept.lock().unwrap().clone()
    }

    /// Seconds elapsed since the start time.
    pub fn elapsed_secs(&self, start: DateTime<Utc>) -> f64 {
        let now = *self.current.lock().unwrap();
        (now - start).num_milliseconds() as f64 / 1000.0
    }
}

impl Default for FakeClock {
    fn default() -> Self {
        FakeClock::new()
    }
}

impl Clock for FakeClock {
    fn now(&self) -> DateTime<Utc> {
        let mut current = self.current.lock().unwrap();
        let now = *current;
        *current = now + chrono::Duration::milliseconds(1);
        now
    }

    fn sleep(&self, duration: Duration) {
        self.slept.lock().unwrap().push(duration);
        let mut current = self.current.lock().unwrap();
        *current += chrono::Duration::from_std(duration).unwrap_or(chrono::Duration::zero());
    }
}
