use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::http::{backoff_delay, Clock, HttpRequest, RateLimiter, RequestBody, Transport};
use super::{
    ChatFeedbackProvider, EmbeddingProvider, GrammarProvider, PerplexityProvider, ProviderConfig,
    ResponseCache,
};
use crate::corpus::Language;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RequestStats {
    /// HTTP requests actually sent, including failed attempts.
    pub network_requests: u64,
    pub cache_hits: u64,
}

/// Cache lookup, per-key request deduplication, rate limiting and retries
/// for one configured remote provider.
pub struct RemoteClient {
    config: ProviderConfig,
    transport: Arc<dyn Transport>,
    clock: Arc<dyn Clock>,
    cache: Option<Arc<ResponseCache>>,
    limiter: RateLimiter,
    memo: Mutex<HashMap<String, String>>,
    inflight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    network_requests: AtomicU64,
    cache_hits: AtomicU64,
}

impl RemoteClient {
    pub fn new(
        config: ProviderConfig,
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
        cache: Option<Arc<ResponseCache>>,
    ) -> Self {
        RemoteClient {
            limiter: RateLimiter::new(config.rate_limit_per_min),
            config,
            transport,
            clock,
            cache,
            memo: Mutex::new(HashMap::new()),
            inflight: Mutex::new(HashMap::new()),
            network_requests: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn stats(&self) -> RequestStats {
        RequestStats {
            network_requests: self.network_requests.load(Ordering::SeqCst),
            cache_hits: self.cache_hits.load(Ordering::SeqCst),
        }
    }

    fn kind(&self) -> &'static str {
        self.config.kind.name()
    }

    fn endpoint(&self) -> &str {
        self.config.endpoint.as_deref().unwrap_or_default().trim_end_matches('/')
    }

    fn timeout(&self) -> Duration {
        Duration::from_millis(self.config.timeout_ms)
    }

    fn lookup(&self, key: &str) -> Result<Option<String>> {
        if let Some(hit) = self.memo.lock().unwrap().get(key) {
            return Ok(Some(hit.clone()));
        }
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(self.kind(), key)? {
                self.memo.lock().unwrap().insert(key.to_string(), entry.response.clone());
                return Ok(Some(entry.response));
            }
        }
        Ok(None)
    }

    /// Return the raw response body for `payload`, from cache when possible.
    /// `request` is only built (and credentials only read) on a cache miss.
    pub fn call(
        &self,
        language: Language,
        payload: &Value,
        request: impl FnOnce() -> Result<HttpRequest>,
    ) -> Result<String> {
        let key = ResponseCache::key(self.kind(), language, payload);
        if let Some(hit) = self.lookup(&key)? {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        let slot = self
            .inflight
            .lock()
            .unwrap()
            .entry(key.clone())
            .or_default()
            .clone();
        let _guard = slot.lock().unwrap();
        if let Some(hit) = self.lookup(&key)? {
            self.cache_hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        let request = request()?;
        let body = self.send_with_retries(&request)?;
        if let Some(cache) = &self.cache {
            cache.put(self.kind(), &key, language, &body)?;
        }
        self.memo.lock().unwrap().insert(key.clone(), body.clone());
        self.inflight.lock().unwrap().remove(&key);
        Ok(body)
    }

    fn send_with_retries(&self, request: &HttpRequest) -> Result<String> {
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                self.clock.sleep(backoff_delay(attempt - 1));
            }
            self.limiter.acquire(self.clock.as_ref());
            self.network_requests.fetch_add(1, Ordering::SeqCst);
            match self.transport.post(request) {
                Ok(resp) if resp.is_success() => {
                    if attempt > 0 {
                        log::info!("{} provider succeeded on attempt {}", self.kind(), attempt + 1);
                    }
                    return Ok(resp.body);
                }
                Ok(resp) if resp.is_retryable() => {
                    last_error = format!("HTTP {}", resp.status);
                }
                Ok(resp) => {
                    return Err(Error::Provider {
                        kind: self.kind().into(),
                        attempts: attempt + 1,
                        message: format!("HTTP {}: {}", resp.status, snippet(&resp.body)),
                    })
                }
                Err(e) => last_error = e,
            }
            log::warn!(
                "{} provider attempt {}/{} failed: {}",
                self.kind(),
                attempt + 1,
                attempts,
                last_error
            );
        }
        Err(Error::Provider {
            kind: self.kind().into(),
            attempts,
            message: last_error,
        })
    }

    fn protocol(&self, message: impl Into<String>) -> Error {
        Error::Protocol {
            kind: self.kind().into(),
            message: message.into(),
        }
    }
}

fn snippet(s: &str) -> &str {
    match s.char_indices().nth(200) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

fn parse_json(client: &RemoteClient, body: &str) -> Result<Value> {
    serde_json::from_str(body).map_err(|e| client.protocol(format!("invalid JSON: {e}")))
}

/// `POST {endpoint}/perplexity` with `{"language", "sentences"}`; expects `{"ppl": [..]}`.
pub struct RemotePerplexity {
    client: RemoteClient,
}

impl RemotePerplexity {
    pub fn new(client: RemoteClient) -> Self {
        RemotePerplexity { client }
    }

    pub fn client(&self) -> &RemoteClient {
        &self.client
    }
}

impl PerplexityProvider for RemotePerplexity {
    fn score_perplexity(&self, sentences: &[String], language: Language) -> Result<Vec<f64>> {
        if sentences.is_empty() {
            return Ok(Vec::new());
        }
        let payload = json!({ "language": language.code(), "sentences": sentences });
        let c = &self.client;
        let body = c.call(language, &payload, || {
            Ok(HttpRequest {
                url: format!("{}/perplexity", c.endpoint()),
                headers: Vec::new(),
                body: RequestBody::Json(payload.clone()),
                timeout: c.timeout(),
            })
        })?;
        let value = parse_json(c, &body)?;
        let ppl = value
            .get("ppl")
            .and_then(Value::as_array)
            .ok_or_else(|| c.protocol("missing array field `ppl`"))?;
        if ppl.len() != sentences.len() {
            return Err(c.protocol(format!(
                "sent {} sentences, received {} perplexities",
                sentences.len(),
                ppl.len()
            )));
        }
        ppl.iter()
            .map(|v| match v.as_f64() {
                Some(x) if x.is_finite() && x > 0.0 => Ok(x),
                _ => Err(c.protocol(format!("perplexity {v} is not a positive number"))),
            })
            .collect()
    }
}

/// `POST {endpoint}/embed` with `{"texts"}`; expects `{"vectors": [[..]]}`.
pub struct RemoteEmbedder {
    client: RemoteClient,
}

impl RemoteEmbedder {
    pub fn new(client: RemoteClient) -> Self {
        RemoteEmbedder { client }
    }

    pub fn client(&self) -> &RemoteClient {
        &self.client
    }
}

impl EmbeddingProvider for RemoteEmbedder {
    fn embed_sentences(&self, sentences: &[String], language: Language) -> Result<Vec<Vec<f64>>> {
        if sentences.is_empty() {
            return Ok(Vec::new());
        }
        let payload = json!({ "texts": sentences });
        let c = &self.client;
        let body = c.call(language, &payload, || {
            Ok(HttpRequest {
                url: format!("{}/embed", c.endpoint()),
                headers: Vec::new(),
                body: RequestBody::Json(payload.clone()),
                timeout: c.timeout(),
            })
        })?;
        let value = parse_json(c, &body)?;
        let rows = value
            .get("vectors")
            .and_then(Value::as_array)
            .ok_or_else(|| c.protocol("missing array field `vectors`"))?;
        if rows.len() != sentences.len() {
            return Err(c.protocol(format!("sent {} texts, received {} vectors", sentences.len(), rows.len())));
        }
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            let row = row.as_array().ok_or_else(|| c.protocol("vector is not an array"))?;
            let vec = row
                .iter()
                .map(|x| {
                    x.as_f64()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| c.protocol("vector component is not a finite number"))
                })
                .collect::<Result<Vec<f64>>>()?;
            out.push(vec);
        }
        let width = out[0].len();
        if width == 0 || out.iter().any(|v| v.len() != width) {
            return Err(c.protocol("ragged or empty vectors"));
        }
        Ok(out)
    }
}

/// Language codes understood by LanguageTool-compatible servers.
pub fn grammar_language_code(language: Language) -> &'static str {
    match language {
        Language::En => "en-US",
        Language::Fr => "fr",
        Language::De => "de-DE",
        Language::Es => "es",
    }
}

/// `POST {endpoint}/v2/check` form-encoded `language`, `text`; counts `matches`.
pub struct RemoteGrammar {
    client: RemoteClient,
}

impl RemoteGrammar {
    pub fn new(client: RemoteClient) -> Self {
        RemoteGrammar { client }
    }

    pub fn client(&self) -> &RemoteClient {
        &self.client
    }
}

impl GrammarProvider for RemoteGrammar {
    fn check_grammar(&self, text: &str, language: Language) -> Result<usize> {
        let code = grammar_language_code(language);
        let payload = json!({ "language": code, "text": text });
        let c = &self.client;
        let body = c.call(language, &payload, || {
            Ok(HttpRequest {
                url: format!("{}/v2/check", c.endpoint()),
                headers: Vec::new(),
                body: RequestBody::Form(vec![
                    ("language".into(), code.into()),
                    ("text".into(), text.into()),
                ]),
                timeout: c.timeout(),
            })
        })?;
        let value = parse_json(c, &body)?;
        value
            .get("matches")
            .and_then(Value::as_array)
            .map(Vec::len)
            .ok_or_else(|| c.protocol("missing array field `matches`"))
    }
}

/// Language tag of a chat request.
pub fn chat_language_tag(language: Language) -> &'static str {
    language.code()
}

/// Chat-completions style request: one user message holding prompt, a blank
/// line, then the document body. Reads `choices[0].message.content`.
pub struct RemoteChat {
    client: RemoteClient,
}

impl RemoteChat {
    pub fn new(client: RemoteClient) -> Self {
        RemoteChat { client }
    }

    pub fn client(&self) -> &RemoteClient {
        &self.client
    }
}

impl ChatFeedbackProvider for RemoteChat {
    fn ask_chat(&self, prompt: &str, body: &str, language: Language) -> Result<String> {
        let c = &self.client;
        let model = c.config().model.clone().unwrap_or_else(|| "default".into());
        let payload = json!({
            "model": model,
            "temperature": 0,
            "messages": [{ "role": "user", "content": format!("{prompt}\n\n{body}") }],
        });
        let response = c.call(language, &payload, || {
            let env = c.config().token_env();
            let token = std::env::var(env)
                .ok()
                .filter(|t| !t.is_empty())
                .ok_or_else(|| Error::Config(format!("chat provider: environment variable {env} is not set")))?;
            Ok(HttpRequest {
                url: c.endpoint().to_string(),
                headers: vec![("Authorization".into(), format!("Bearer {token}"))],
                body: RequestBody::Json(payload.clone()),
                timeout: c.timeout(),
            })
        })?;
        let value = parse_json(c, &response)?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| c.protocol("missing choices[0].message.content"))
    }
}
