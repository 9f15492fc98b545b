//! Transport, clock, rate limiting and retry policy shared by all remote
//! providers.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Base delay of the exponential backoff: attempts wait 1x, 2x, 4x ... this.
pub const RETRY_BASE: Duration = Duration::from_millis(500);
const WINDOW: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq)]
pub enum RequestBody {
    Json(serde_json::Value),
    Form(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: RequestBody,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }

    /// Server-side or throttling failures are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        self.status == 429 || self.status >= 500
    }
}

/// Something that can carry one HTTP POST. `Err` means the request never
/// produced a response (connect failure, timeout).
pub trait Transport: Send + Sync {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, String>;
}

/// Blocking transport over `ureq`.
#[derive(Debug, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post(&self, request: &HttpRequest) -> Result<HttpResponse, String> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(request.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut builder = agent.post(&request.url);
        for (k, v) in &request.headers {
            builder = builder.header(k.as_str(), v.as_str());
        }
        let result = match &request.body {
            RequestBody::Json(value) => builder
                .header("Content-Type", "application/json; charset=utf-8")
                .send(serde_json::to_vec(value).map_err(|e| e.to_string())?),
            RequestBody::Form(fields) => builder.send_form(
                fields
                    .iter()
                    .map(|(k, v)| (k.as_str(), v.as_str()))
                    .collect::<Vec<_>>(),
            ),
        };
        let mut response = result.map_err(|e| e.to_string())?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| e.to_string())?;
        Ok(HttpResponse { status, body })
    }
}

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
    fn sleep(&self, duration: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Clock that only moves when slept on. Records every sleep.
#[derive(Debug, Default)]
pub struct FakeClock {
    state: Mutex<(Duration, Vec<Duration>)>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().unwrap().1.clone()
    }

    pub fn advance(&self, by: Duration) {
        self.state.lock().unwrap().0 += by;
    }
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().0
    }

    fn sleep(&self, duration: Duration) {
        let mut s = self.state.lock().unwrap();
        s.0 += duration;
        s.1.push(duration);
    }
}

/// Sliding one-minute window; `limit == 0` disables limiting.
#[derive(Debug)]
pub struct RateLimiter {
    limit: u32,
    sent: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(limit_per_min: u32) -> Self {
        RateLimiter {
            limit: limit_per_min,
            sent: Mutex::new(VecDeque::new()),
        }
    }

    /// Block (on `clock`) until one more request fits in the window, then record it.
    pub fn acquire(&self, clock: &dyn Clock) {
        if self.limit == 0 {
            return;
        }
        let mut sent = self.sent.lock().unwrap();
        loop {
            let now = clock.now();
            while sent.front().is_some_and(|&t| now >= t + WINDOW) {
                sent.pop_front();
            }
            if sent.len() < self.limit as usize {
                sent.push_back(now);
                return;
            }
            let wait = (sent[0] + WINDOW).saturating_sub(now);
            clock.sleep(wait.max(Duration::from_millis(1)));
        }
    }
}

/// Delay before re-attempt number `retry` (0-based).
pub fn backoff_delay(retry: u32) -> Duration {
    RETRY_BASE * 2u32.saturating_pow(retry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles() {
        assert_eq!(backoff_delay(0), Duration::from_millis(500));
        assert_eq!(backoff_delay(1), Duration::from_millis(1000));
        assert_eq!(backoff_delay(2), Duration::from_millis(2000));
    }

    #[test]
    fn rate_limit_under_fake_clock() {
        let clock = FakeClock::new();
        let limiter = RateLimiter::new(3);
        let mut stamps = Vec::new();
        for _ in 0..10 {
            limiter.acquire(&clock);
            stamps.push(clock.now());
        }
        for (i, &t) in stamps.iter().enumerate() {
            let in_window = stamps[i..].iter().filter(|&&u| u < t + WINDOW).count();
            assert!(in_window <= 3, "window starting at {t:?} holds {in_window}");
        }
        // 10 requests at 3/min need at least three full windows
        assert!(*stamps.last().unwrap() >= Duration::from_secs(180));
    }

    #[test]
    fn zero_limit_never_waits() {
        let clock = FakeClock::new();
        let limiter = RateLimiter::new(0);
        for _ in 0..100 {
            limiter.acquire(&clock);
        }
        assert!(clock.sleeps().is_empty());
    }
}
