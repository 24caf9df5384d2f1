// SPDX-License-Identifier: Apache-2.0

//! Model access: OpenAI-compatible chat-completions endpoints and a scripted
//! mock with the same interface.
//!
//! API keys are read from the environment variable a [`ModelConfig`] names.
//! They are held only in memory and never appear in `Debug` output, logs, or
//! persisted snapshots.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const MOCK_ENDPOINT: &str = "mock";

/// Stable fingerprint of a prompt: lowercase hex SHA-256 of its bytes.
pub fn prompt_fingerprint(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub model_id: String,
    /// Base URL (the path `/chat/completions` is appended) or `"mock"`.
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    pub temperature: f64,
    pub n_samples: usize,
    pub max_tokens: u32,
    /// Seconds.
    pub request_timeout: f64,
    pub max_retries: u32,
    /// Seconds before the first retry; doubled on each further attempt.
    pub retry_base: f64,
    /// Mock only: the script file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mock_script: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            model_id: MOCK_ENDPOINT.into(),
            endpoint: MOCK_ENDPOINT.into(),
            api_key_env: None,
            temperature: 0.7,
            n_samples: 5,
            max_tokens: 4096,
            request_timeout: 300.0,
            max_retries: 3,
            retry_base: 1.0,
            mock_script: None,
        }
    }
}

impl ModelConfig {
    pub fn is_mock(&self) -> bool {
        self.endpoint == MOCK_ENDPOINT
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        let bad = |m: &str| Err(LlmError::Config(format!("model `{}`: {m}", self.model_id)));
        if self.model_id.trim().is_empty() {
            return bad("empty model id");
        }
        // Written so NaN fails too.
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return bad("temperature must be >= 0");
        }
        if self.n_samples == 0 {
            return bad("n_samples must be positive");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        if !self.request_timeout.is_finite()
            || self.request_timeout <= 0.0
            || !self.retry_base.is_finite()
            || self.retry_base < 0.0
        {
            return bad("timeouts must be positive");
        }
        if !self.is_mock() && !(self.endpoint.starts_with("http://") || self.endpoint.starts_with("https://")) {
            return bad("endpoint must be an http(s) URL or \"mock\"");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LlmError {
    #[error("model configuration: {0}")]
    Config(String),
    #[error("request to {endpoint} failed after {attempts} attempt(s): {reason}")]
    Transport {
        endpoint: String,
        attempts: u32,
        reason: String,
    },
    #[error("mock script: {0}")]
    Mock(String),
}

impl LlmError {
    fn transport(endpoint: &str, attempts: u32, reason: impl Into<String>) -> Self {
        LlmError::Transport {
            endpoint: endpoint.into(),
            attempts,
            reason: reason.into(),
        }
    }
}

/// Anything that turns a prompt into one completion.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, prompt: &str, sample_idx: usize) -> Result<String, LlmError>;
}

/// A configured model: sampling parameters plus the backend serving them.
#[derive(Clone)]
pub struct Model {
    pub config: ModelConfig,
    backend: Arc<dyn CompletionBackend>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Model {
    pub fn new(config: ModelConfig, backend: Arc<dyn CompletionBackend>) -> Self {
        Model { config, backend }
    }

    /// Builds the backend the config describes. Remote models fail here,
    /// before any request, when the key variable is unset.
    pub fn from_config(config: ModelConfig) -> Result<Self, LlmError> {
        config.validate()?;
        let backend: Arc<dyn CompletionBackend> = if config.is_mock() {
            match &config.mock_script {
                Some(path) => Arc::new(MockModel::new(MockScript::load(path)?)),
                None => Arc::new(MockModel::new(MockScript::default())),
            }
        } else {
            Arc::new(OpenAiClient::new(&config)?)
        };
        Ok(Model { config, backend })
    }

    pub fn id(&self) -> &str {
        &self.config.model_id
    }

    pub fn complete(&self, prompt: &str, sample_idx: usize) -> Result<String, LlmError> {
        self.backend.complete(prompt, sample_idx)
    }

    /// `n_samples` completions in sample order. A failed sample stays in
    /// place as an error.
    pub fn sample_n(&self, prompt: &str) -> Vec<Result<String, LlmError>> {
        (0..self.config.n_samples)
            .map(|i| self.complete(prompt, i))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Mock

/// One scripted reply: response text, or an injected failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockReply {
    Text(String),
    Error { error: String },
}

/// A fingerprint entry: one reply for every sample, or one per sample index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockEntry {
    One(MockReply),
    PerSample(Vec<MockReply>),
}

/// Scripted responses, loaded from JSON.
///
/// Lookup order for a request: `by_fingerprint` (SHA-256 of the prompt),
/// then `per_sample[sample_idx]`, then the next `queue` entry, then
/// `fallback`. A request nothing answers is an error.
///
/// `per_sample` and `by_fingerprint` depend only on the request, so they
/// stay deterministic under any scheduling; `queue` depends on call order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockScript {
    pub queue: Vec<MockReply>,
    pub per_sample: Vec<MockReply>,
    pub by_fingerprint: BTreeMap<String, MockEntry>,
    pub fallback: Option<MockReply>,
}

impl MockScript {
    pub fn load(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LlmError::Config(format!("{}: {e}", path.display())))
    }

    pub fn queue(replies: impl IntoIterator<Item = impl Into<String>>) -> Self {
        MockScript {
            queue: replies.into_iter().map(|r| MockReply::Text(r.into())).collect(),
            ..Default::default()
        }
    }

    pub fn per_sample(replies: impl IntoIterator<Item = impl Into<String>>) -> Self {
        MockScript {
            per_sample: replies.into_iter().map(|r| MockReply::Text(r.into())).collect(),
            ..Default::default()
        }
    }
}

#[derive(Debug)]
pub struct MockModel {
    script: MockScript,
    queue: Mutex<VecDeque<MockReply>>,
}

impl MockModel {
    pub fn new(script: MockScript) -> Self {
        let queue = Mutex::new(script.queue.iter().cloned().collect());
        MockModel { script, queue }
    }

    fn lookup(&self, prompt: &str, sample_idx: usize) -> Option<MockReply> {
        if !self.script.by_fingerprint.is_empty() {
            match self.script.by_fingerprint.get(&prompt_fingerprint(prompt)) {
                Some(MockEntry::One(r)) => return Some(r.clone()),
                Some(MockEntry::PerSample(rs)) => {
                    if let Some(r) = rs.get(sample_idx) {
                        return Some(r.clone());
                    }
                }
                None => {}
            }
        }
        if let Some(r) = self.script.per_sample.get(sample_idx) {
            return Some(r.clone());
        }
        if let Some(r) = self.queue.lock().unwrap_or_else(|p| p.into_inner()).pop_front() {
            return Some(r);
        }
        self.script.fallback.clone()
    }
}

impl CompletionBackend for MockModel {
    fn complete(&self, prompt: &str, sample_idx: usize) -> Result<String, LlmError> {
        match self.lookup(prompt, sample_idx) {
            Some(MockReply::Text(t)) => Ok(t),
            Some(MockReply::Error { error }) => Err(LlmError::transport(MOCK_ENDPOINT, 1, error)),
            None => Err(LlmError::Mock(format!(
                "no scripted reply for sample {sample_idx} (prompt {})",
                &prompt_fingerprint(prompt)[..12]
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Remote

struct ApiKey(String);

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<redacted>")
    }
}

/// Client for `POST {endpoint}/chat/completions`.
#[derive(Debug)]
pub struct OpenAiClient {
    url: String,
    endpoint: String,
    model_id: String,
    key: Option<ApiKey>,
    temperature: f64,
    max_tokens: u32,
    max_retries: u32,
    retry_base: Duration,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatReplyMessage,
}

#[derive(Deserialize)]
struct ChatReplyMessage {
    content: Option<String>,
}

enum Attempt {
    Done(String),
    Retry(String),
    Fatal(String),
}

impl OpenAiClient {
    pub fn new(config: &ModelConfig) -> Result<Self, LlmError> {
        let key = match &config.api_key_env {
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.is_empty() => Some(ApiKey(v)),
                _ => {
                    return Err(LlmError::Config(format!(
                        "model `{}`: environment variable {var} is not set",
                        config.model_id
                    )))
                }
            },
            None => None,
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs_f64(config.request_timeout)))
            .build()
            .into();
        let endpoint = config.endpoint.trim_end_matches('/').to_string();
        Ok(OpenAiClient {
            url: format!("{endpoint}/chat/completions"),
            endpoint,
            model_id: config.model_id.clone(),
            key,
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            max_retries: config.max_retries,
            retry_base: Duration::from_secs_f64(config.retry_base),
            agent,
        })
    }

    fn attempt(&self, prompt: &str, sample_idx: usize) -> Attempt {
        let body = ChatRequest {
            model: &self.model_id,
            messages: [ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.temperature,
            max_tokens: self.max_tokens,
        };
        let mut req = self
            .agent
            .post(&self.url)
            .header("X-Sample-Index", sample_idx.to_string());
        if let Some(ApiKey(k)) = &self.key {
            req = req.header("Authorization", format!("Bearer {k}"));
        }
        let mut resp = match req.send_json(&body) {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Attempt::Retry(format!("HTTP {status}"));
        }
        if status != 200 {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            let detail: String = detail.chars().take(300).collect();
            return Attempt::Fatal(format!("HTTP {status}: {detail}"));
        }
        match resp.body_mut().read_json::<ChatResponse>() {
            Ok(parsed) => match parsed.choices.into_iter().next().and_then(|c| c.message.content) {
                Some(text) => Attempt::Done(text),
                None => Attempt::Fatal("response has no message content".into()),
            },
            Err(e) => Attempt::Retry(format!("malformed response: {e}")),
        }
    }

    fn backoff(&self, retry: u32) -> Duration {
        let base = self.retry_base.as_secs_f64() * 2f64.powi(retry as i32);
        let jitter = 0.75 + 0.5 * rand::random::<f64>();
        Duration::from_secs_f64(base * jitter)
    }
}

impl CompletionBackend for OpenAiClient {
    fn complete(&self, prompt: &str, sample_idx: usize) -> Result<String, LlmError> {
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(prompt, sample_idx) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(reason) => return Err(LlmError::transport(&self.endpoint, attempts, reason)),
                Attempt::Retry(reason) => {
                    if attempts > self.max_retries {
                        return Err(LlmError::transport(&self.endpoint, attempts, reason));
                    }
                    log::warn!(
                        "{} sample {sample_idx}: attempt {attempts} failed ({reason}); retrying",
                        self.model_id
                    );
                    thread::sleep(self.backoff(attempts - 1));
                }
            }
        }
    }
}
