//! Provider-agnostic chat-completion client.
//!
//! [`ChatProvider`] is the surface the pipeline stages program against. The
//! production implementation is [`Client`] over an HTTP transport with
//! bounded in-flight requests and exponential-backoff retries; a file-backed
//! record/replay pair makes whole pipeline runs reproducible offline.

mod http;
pub mod prompts;
mod replay;
pub mod testing;

pub use http::HttpTransport;
pub use prompts::{PromptId, PromptTemplate, PLACEHOLDERS};
pub use replay::{read_exchanges, RecordingProvider, RecordingSink, ReplayProvider};

use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_API_KEY_ENV: &str = "MIFC_API_KEY";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key. The key itself
    /// never appears in configs, request bodies, or logs.
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_api_key_env() -> String {
    DEFAULT_API_KEY_ENV.to_string()
}

fn default_timeout_secs() -> u64 {
    60
}

fn default_max_retries() -> u32 {
    3
}

fn default_max_in_flight() -> usize {
    4
}

fn default_temperature() -> f64 {
    0.7
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            base_url: "https://api.openai.com/v1".to_string(),
            model_name: "gpt-4o-mini".to_string(),
            api_key_env: default_api_key_env(),
            timeout_secs: default_timeout_secs(),
            max_retries: default_max_retries(),
            max_in_flight: default_max_in_flight(),
            temperature: default_temperature(),
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_url.is_empty() {
            return Err(Error::config("provider base_url must be non-empty"));
        }
        if self.max_in_flight < 1 {
            return Err(Error::config("provider max_in_flight must be at least 1"));
        }
        if self.max_retries > 10 {
            return Err(Error::config("provider max_retries must be at most 10"));
        }
        if self.temperature < 0.0 {
            return Err(Error::config("provider temperature must be non-negative"));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs(self.timeout_secs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// One completed request/response, as recorded in replay files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    /// Model label the exchange belongs to (distinguishes generator and
    /// judges inside one replay file).
    pub model: String,
    /// The rendered prompt, sent as a single user message.
    pub request: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<TokenUsage>,
    #[serde(default)]
    pub latency_ms: u64,
    #[serde(default = "default_attempt")]
    pub attempt: u32,
}

fn default_attempt() -> u32 {
    1
}

/// A chat endpoint as seen by the pipeline stages.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<ChatExchange>;

    /// Model label written into exchanges produced by this provider.
    fn label(&self) -> &str;
}

pub struct ChatRequest {
    pub model: String,
    pub prompt: String,
    pub temperature: f64,
}

pub struct TransportResponse {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

/// A transport failure, classified for the retry loop.
pub struct SendFailure {
    pub retryable: bool,
    pub message: String,
}

/// Single-attempt request executor behind [`Client`].
pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> std::result::Result<TransportResponse, SendFailure>;
}

/// Counting semaphore gating in-flight requests across all caller threads.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore { permits: Mutex::new(permits), available: Condvar::new() }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphoreGuard { semaphore: self }
    }

    fn release(&self) {
        let mut permits = self.permits.lock().unwrap();
        *permits += 1;
        self.available.notify_one();
    }
}

struct SemaphoreGuard<'a> {
    semaphore: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        self.semaphore.release();
    }
}

/// Retrying, admission-limited client over a [`ChatTransport`].
pub struct Client<T: ChatTransport> {
    cfg: ProviderConfig,
    transport: T,
    limiter: Arc<Semaphore>,
    backoff_base: Duration,
}

impl Client<HttpTransport> {
    /// Production client: HTTP transport configured from `cfg`.
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self> {
        cfg.validate()?;
        let transport = HttpTransport::new(cfg)?;
        Ok(Client::with_transport(cfg.clone(), transport))
    }
}

impl<T: ChatTransport> Client<T> {
    pub fn with_transport(cfg: ProviderConfig, transport: T) -> Self {
        let limiter = Arc::new(Semaphore::new(cfg.max_in_flight.max(1)));
        Client { cfg, transport, limiter, backoff_base: Duration::from_secs(1) }
    }

    /// Override the backoff base delay (tests use milliseconds).
    pub fn with_backoff_base(mut self, base: Duration) -> Self {
        self.backoff_base = base;
        self
    }
}

impl<T: ChatTransport> ChatProvider for Client<T> {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<ChatExchange> {
        let _permit = self.limiter.acquire();
        let request = ChatRequest {
            model: self.cfg.model_name.clone(),
            prompt: prompt.to_string(),
            temperature,
        };
        let start = Instant::now();
        let mut attempt = 1u32;
        loop {
            // Requests are only ever re-sent verbatim.
            match self.transport.send(&request) {
                Ok(response) => {
                    return Ok(ChatExchange {
                        model: self.cfg.model_name.clone(),
                        request: request.prompt,
                        response: response.text,
                        usage: response.usage,
                        latency_ms: start.elapsed().as_millis() as u64,
                        attempt,
                    });
                }
                Err(failure) if failure.retryable && attempt <= self.cfg.max_retries => {
                    let exp = self.backoff_base.saturating_mul(1u32 << (attempt - 1).min(16));
                    let jitter_ms = if exp.as_millis() > 0 {
                        rand::rng().random_range(0..=exp.as_millis() as u64 / 2)
                    } else {
                        0
                    };
                    log::warn!(
                        "request to {} failed (attempt {attempt}/{}): {}; retrying",
                        self.cfg.model_name,
                        self.cfg.max_retries + 1,
                        failure.message
                    );
                    std::thread::sleep(exp + Duration::from_millis(jitter_ms));
                    attempt += 1;
                }
                Err(failure) if failure.retryable => {
                    return Err(Error::transport(format!(
                        "{} attempts exhausted: {}",
                        attempt, failure.message
                    )));
                }
                Err(failure) => {
                    return Err(Error::transport(failure.message));
                }
            }
        }
    }

    fn label(&self) -> &str {
        &self.cfg.model_name
    }
}
