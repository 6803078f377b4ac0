//! Chat-completion client with replay fixtures, retries and a shared rate limiter.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompletionError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("no recorded response for prompt digest {digest}")]
    FixtureMiss { digest: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FixtureError {
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{path}: digest {digest} recorded twice with different responses")]
    Conflict { path: String, digest: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub endpoint: String,
    pub path: String,
    pub model: String,
    /// Name of the environment variable holding the token. Tokens are never taken from flags or files.
    pub auth_env: String,
    pub auth_header: String,
    pub auth_scheme: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    /// Requests started per second across all workers; 0 disables limiting.
    pub requests_per_second: f64,
    pub sampling: BTreeMap<String, serde_json::Value>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            endpoint: "https://api.openai.com".into(),
            path: "/v1/chat/completions".into(),
            model: "gpt-5-nano".into(),
            auth_env: "OPENAI_API_KEY".into(),
            auth_header: "Authorization".into(),
            auth_scheme: "Bearer".into(),
            timeout_secs: 120,
            max_retries: 4,
            backoff_base_ms: 1000,
            requests_per_second: 2.0,
            sampling: BTreeMap::new(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_secs == 0 {
            return Err("model timeout_secs must be > 0".into());
        }
        if self.model.trim().is_empty() {
            return Err("model identifier is empty".into());
        }
        if !(self.requests_per_second >= 0.0) {
            return Err("requests_per_second must be >= 0".into());
        }
        Ok(())
    }

    pub fn url(&self) -> String {
        format!("{}/{}", self.endpoint.trim_end_matches('/'), self.path.trim_start_matches('/'))
    }

    pub fn request_body(&self, prompt: &str) -> serde_json::Value {
        let mut body = serde_json::Map::new();
        for (k, v) in &self.sampling {
            body.insert(k.clone(), v.clone());
        }
        body.insert("model".into(), self.model.clone().into());
        body.insert("messages".into(), serde_json::json!([{ "role": "user", "content": prompt }]));
        serde_json::Value::Object(body)
    }
}

/// Pulls `choices[0].message.content` out of a chat-completion response body.
pub fn parse_response(body: &str) -> Result<String, CompletionError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| CompletionError::Transport(format!("malformed response: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| CompletionError::Transport("response has no choices[0].message.content".into()))
}

pub fn prompt_digest(prompt: &str, model: &str) -> String {
    let mut h = Sha256::new();
    h.update(prompt.as_bytes());
    h.update([0u8]);
    h.update(model.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &serde_json::Value,
        timeout: Duration,
    ) -> Result<HttpResponse, String>;
}

#[derive(Debug, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &serde_json::Value,
        timeout: Duration,
    ) -> Result<HttpResponse, String> {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        let mut req = agent.post(url);
        for (k, v) in headers {
            req = req.set(k, v);
        }
        match req.send_json(body) {
            Ok(resp) => {
                let status = resp.status();
                let body = resp.into_string().map_err(|e| e.to_string())?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, resp)) => Ok(HttpResponse { status, body: resp.into_string().unwrap_or_default() }),
            Err(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub digest: String,
    pub model: String,
    pub response: String,
}

/// Recorded responses keyed by [`prompt_digest`].
#[derive(Debug, Default)]
pub struct FixtureStore {
    entries: HashMap<String, FixtureEntry>,
    sink: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl FixtureStore {
    pub fn load(path: &Path) -> Result<Self, FixtureError> {
        let display = path.display().to_string();
        let file = File::open(path).map_err(|e| FixtureError::Io(format!("{display}: {e}")))?;
        let mut entries = HashMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| FixtureError::Io(format!("{display}: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(&line).map_err(|e| FixtureError::Format {
                path: display.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if let Some(prev) = entries.get(&entry.digest) {
                if *prev != entry {
                    return Err(FixtureError::Conflict { path: display, digest: entry.digest });
                }
            }
            entries.insert(entry.digest.clone(), entry);
        }
        Ok(FixtureStore { entries, sink: None, path: Some(path.to_path_buf()) })
    }

    /// Loads `path` if it exists and appends newly recorded responses to it.
    pub fn open_for_recording(path: &Path) -> Result<Self, FixtureError> {
        let mut store = if path.exists() { Self::load(path)? } else { FixtureStore::default() };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| FixtureError::Io(format!("{}: {e}", path.display())))?;
        store.sink = Some(Mutex::new(file));
        store.path = Some(path.to_path_buf());
        Ok(store)
    }

    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        FixtureStore { entries: entries.into_iter().map(|e| (e.digest.clone(), e)).collect(), sink: None, path: None }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn entries(&self) -> impl Iterator<Item = &FixtureEntry> {
        self.entries.values()
    }

    pub fn get(&self, prompt: &str, model: &str) -> Result<&str, CompletionError> {
        let digest = prompt_digest(prompt, model);
        self.entries.get(&digest).map(|e| e.response.as_str()).ok_or(CompletionError::FixtureMiss { digest })
    }

    fn record(&self, entry: &FixtureEntry) -> Result<(), CompletionError> {
        if let Some(sink) = &self.sink {
            let line = serde_json::to_string(entry).expect("fixture entries serialize");
            let mut f = sink.lock().unwrap();
            writeln!(f, "{line}").and_then(|_| f.flush()).map_err(|e| CompletionError::Transport(e.to_string()))?;
        }
        Ok(())
    }
}

/// Token bucket: at most `rate` request starts per second, bursts up to `max(rate, 1)`.
#[derive(Debug)]
pub struct RateLimiter {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    pub fn new(rate: f64) -> Self {
        let capacity = rate.max(1.0);
        RateLimiter { rate, capacity, state: Mutex::new((capacity, Instant::now())) }
    }

    pub fn unlimited() -> Self {
        Self::new(0.0)
    }

    pub fn acquire(&self) {
        if self.rate <= 0.0 {
            return;
        }
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap();
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.rate;
                st.0 = (st.0 + refill).min(self.capacity);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                (1.0 - st.0) / self.rate
            };
            thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Replay,
    /// Live requests whose responses are appended to the fixture file.
    Record,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptLog {
    pub attempt: u32,
    pub started_ms: u64,
    pub finished_ms: u64,
    pub outcome: String,
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

pub struct Client {
    pub config: ModelConfig,
    pub mode: Mode,
    transport: Arc<dyn Transport>,
    limiter: Arc<RateLimiter>,
    fixtures: Option<Arc<FixtureStore>>,
}

impl Client {
    pub fn live(config: ModelConfig, transport: Arc<dyn Transport>) -> Self {
        let limiter = Arc::new(RateLimiter::new(config.requests_per_second));
        Client { config, mode: Mode::Live, transport, limiter, fixtures: None }
    }

    pub fn replay(config: ModelConfig, fixtures: Arc<FixtureStore>) -> Self {
        Client {
            config,
            mode: Mode::Replay,
            transport: Arc::new(NoNetwork),
            limiter: Arc::new(RateLimiter::unlimited()),
            fixtures: Some(fixtures),
        }
    }

    pub fn record(config: ModelConfig, transport: Arc<dyn Transport>, fixtures: Arc<FixtureStore>) -> Self {
        let mut c = Self::live(config, transport);
        c.mode = Mode::Record;
        c.fixtures = Some(fixtures);
        c
    }

    /// Replaces the transport, e.g. with one that fails on any use.
    pub fn with_transport(mut self, transport: Arc<dyn Transport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn with_limiter(mut self, limiter: Arc<RateLimiter>) -> Self {
        self.limiter = limiter;
        self
    }

    /// One response per prompt. Every network attempt is appended to `log`.
    pub fn complete(&self, prompt: &str, log: &mut Vec<AttemptLog>) -> Result<String, CompletionError> {
        let model = &self.config.model;
        if let Some(store) = &self.fixtures {
            match store.get(prompt, model) {
                Ok(r) => {
                    let t = now_ms();
                    log.push(AttemptLog { attempt: 0, started_ms: t, finished_ms: t, outcome: "replay".into() });
                    return Ok(r.to_string());
                }
                Err(e) if self.mode == Mode::Replay => return Err(e),
                Err(_) => {}
            }
        }
        let token = std::env::var(&self.config.auth_env)
            .ok()
            .filter(|t| !t.trim().is_empty())
            .ok_or_else(|| CompletionError::Auth(format!("environment variable {} is not set", self.config.auth_env)))?;
        let headers = vec![
            (self.config.auth_header.clone(), format!("{} {}", self.config.auth_scheme, token).trim().to_string()),
            ("Content-Type".to_string(), "application/json".to_string()),
        ];
        let body = self.config.request_body(prompt);
        let url = self.config.url();
        let timeout = Duration::from_secs(self.config.timeout_secs);
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            self.limiter.acquire();
            let started_ms = now_ms();
            let result = self.transport.post_json(&url, &headers, &body, timeout);
            let finished_ms = now_ms();
            let (outcome, retry_err) = match result {
                Ok(HttpResponse { status: 200..=299, body }) => {
                    let parsed = parse_response(&body);
                    log.push(AttemptLog {
                        attempt,
                        started_ms,
                        finished_ms,
                        outcome: if parsed.is_ok() { "ok".into() } else { "malformed".into() },
                    });
                    let text = parsed?;
                    if let (Mode::Record, Some(store)) = (self.mode, &self.fixtures) {
                        store.record(&FixtureEntry {
                            digest: prompt_digest(prompt, model),
                            model: model.clone(),
                            response: text.clone(),
                        })?;
                    }
                    return Ok(text);
                }
                Ok(HttpResponse { status: status @ (401 | 403), .. }) => {
                    log.push(AttemptLog { attempt, started_ms, finished_ms, outcome: format!("http {status}") });
                    return Err(CompletionError::Auth(format!("endpoint answered {status}")));
                }
                Ok(HttpResponse { status: 429, .. }) => ("http 429".to_string(), CompletionError::RateLimited { attempts: attempt }),
                Ok(HttpResponse { status, body }) if status >= 500 => {
                    (format!("http {status}"), CompletionError::Transport(format!("http {status}: {}", excerpt(&body))))
                }
                Ok(HttpResponse { status, body }) => {
                    log.push(AttemptLog { attempt, started_ms, finished_ms, outcome: format!("http {status}") });
                    return Err(CompletionError::Transport(format!("http {status}: {}", excerpt(&body))));
                }
                Err(e) => (format!("transport: {e}"), CompletionError::Transport(e)),
            };
            log.push(AttemptLog { attempt, started_ms, finished_ms, outcome });
            if attempt > self.config.max_retries {
                return Err(retry_err);
            }
            let backoff = self.config.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(16)).min(60_000);
            log::debug!("attempt {attempt} failed, retrying in {backoff} ms");
            thread::sleep(Duration::from_millis(backoff));
        }
    }
}

fn excerpt(s: &str) -> String {
    s.chars().take(200).collect()
}

/// Transport used in replay mode; any call is a bug.
struct NoNetwork;

impl Transport for NoNetwork {
    fn post_json(&self, url: &str, _: &[(String, String)], _: &serde_json::Value, _: Duration) -> Result<HttpResponse, String> {
        Err(format!("network use attempted in replay mode ({url})"))
    }
}
