//! HTTP transport speaking the de-facto chat-completions shape:
//! `POST {base_url}/chat/completions` with `{model, messages, temperature}`.
//! The API key travels only in the `Authorization` header, never in the body.

use crate::error::{Error, Result};

use super::{ChatRequest, ChatTransport, ProviderConfig, SendFailure, TokenUsage, TransportResponse};

pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: String,
}

impl HttpTransport {
    pub fn new(cfg: &ProviderConfig) -> Result<Self> {
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            Error::config(format!("API key env var {} is not set", cfg.api_key_env))
        })?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpTransport {
            agent,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            api_key,
        })
    }
}

/// Serialized request body. Contains the model, messages, and temperature —
/// nothing else, so any compatible endpoint accepts it.
pub(crate) fn request_body(request: &ChatRequest) -> String {
    serde_json::json!({
        "model": request.model,
        "messages": [{ "role": "user", "content": request.prompt }],
        "temperature": request.temperature,
    })
    .to_string()
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<TransportResponse, SendFailure> {
        let body = request_body(request);
        let result = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .header("Content-Type", "application/json")
            .send(body);

        let mut response = match result {
            Ok(response) => response,
            Err(e) => {
                // Connection-level failures (refused, DNS, timeout) are
                // transient by assumption.
                return Err(SendFailure { retryable: true, message: e.to_string() });
            }
        };

        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| SendFailure { retryable: true, message: format!("read body: {e}") })?;

        if !(200..300).contains(&status) {
            let retryable = status == 429 || status == 408 || (500..600).contains(&status);
            return Err(SendFailure {
                retryable,
                message: format!("HTTP {status}: {}", truncate(&text, 200)),
            });
        }

        parse_completion(&text).map_err(|msg| SendFailure { retryable: false, message: msg })
    }
}

fn parse_completion(text: &str) -> std::result::Result<TransportResponse, String> {
    let payload: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("response not JSON: {e}"))?;
    let content = payload
        .pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .ok_or_else(|| "response missing choices[0].message.content".to_string())?;
    let usage = payload.get("usage").map(|u| TokenUsage {
        prompt_tokens: u.get("prompt_tokens").and_then(|v| v.as_u64()).unwrap_or(0),
        completion_tokens: u.get("completion_tokens").and_then(|v| v.as_u64()).unwrap_or(0),
    });
    Ok(TransportResponse { text: content.to_string(), usage })
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((idx, _)) => &s[..idx],
        None => s,
    }
}
