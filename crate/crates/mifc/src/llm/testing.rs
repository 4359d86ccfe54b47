//! Deterministic in-process providers and transports for tests and fixture
//! generation. No network involved.

use crate::error::Result;

use super::{ChatExchange, ChatProvider};
#[cfg(test)]
use super::{ChatRequest, ChatTransport, SendFailure, TransportResponse};
#[cfg(test)]
use std::sync::atomic::{AtomicI64, AtomicU32, Ordering};
#[cfg(test)]
use std::sync::Arc;
#[cfg(test)]
use std::time::Duration;

/// Provider backed by a closure from prompt to response.
pub struct FnProvider {
    label: String,
    respond: Box<dyn Fn(&str) -> Result<String> + Send + Sync>,
}

impl FnProvider {
    pub fn new(
        label: impl Into<String>,
        respond: impl Fn(&str) -> Result<String> + Send + Sync + 'static,
    ) -> Self {
        FnProvider { label: label.into(), respond: Box::new(respond) }
    }
}

impl ChatProvider for FnProvider {
    fn complete(&self, prompt: &str, _temperature: f64) -> Result<ChatExchange> {
        let response = (self.respond)(prompt)?;
        Ok(ChatExchange {
            model: self.label.clone(),
            request: prompt.to_string(),
            response,
            usage: None,
            latency_ms: 0,
            attempt: 1,
        })
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Transport that fails with a retryable error a fixed number of times before
/// delegating to a closure, or always fails fatally.
#[cfg(test)]
pub(crate) struct FlakyTransport<F> {
    failures_left: AtomicU32,
    respond: Option<F>,
    fatal_message: Option<String>,
}

#[cfg(test)]
impl FlakyTransport<fn(&ChatRequest) -> String> {
    pub fn fatal(message: &str) -> Self {
        FlakyTransport {
            failures_left: AtomicU32::new(0),
            respond: None,
            fatal_message: Some(message.to_string()),
        }
    }
}

#[cfg(test)]
impl<F: Fn(&ChatRequest) -> String + Send + Sync> FlakyTransport<F> {
    pub fn new(failures: u32, respond: F) -> Self {
        FlakyTransport {
            failures_left: AtomicU32::new(failures),
            respond: Some(respond),
            fatal_message: None,
        }
    }
}

#[cfg(test)]
impl<F: Fn(&ChatRequest) -> String + Send + Sync> ChatTransport for FlakyTransport<F> {
    fn send(&self, request: &ChatRequest) -> std::result::Result<TransportResponse, SendFailure> {
        if let Some(message) = &self.fatal_message {
            return Err(SendFailure { retryable: false, message: message.clone() });
        }
        let left = self.failures_left.load(Ordering::SeqCst);
        if left > 0 {
            self.failures_left.store(left - 1, Ordering::SeqCst);
            return Err(SendFailure { retryable: true, message: "simulated 503".to_string() });
        }
        let respond = self.respond.as_ref().expect("non-fatal transport has a responder");
        Ok(TransportResponse { text: respond(request), usage: None })
    }
}

/// Transport that records the highest number of concurrently active sends.
#[cfg(test)]
pub(crate) struct TrackingTransport {
    active: AtomicI64,
    max_seen: Arc<AtomicI64>,
    hold: Duration,
}

#[cfg(test)]
impl TrackingTransport {
    pub fn new(hold: Duration) -> Self {
        TrackingTransport {
            active: AtomicI64::new(0),
            max_seen: Arc::new(AtomicI64::new(0)),
            hold,
        }
    }

    pub fn max_seen(&self) -> Arc<AtomicI64> {
        Arc::clone(&self.max_seen)
    }
}

#[cfg(test)]
impl ChatTransport for TrackingTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<TransportResponse, SendFailure> {
        let now = self.active.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_seen.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(self.hold);
        self.active.fetch_sub(1, Ordering::SeqCst);
        Ok(TransportResponse { text: format!("ok: {}", request.prompt), usage: None })
    }
}
