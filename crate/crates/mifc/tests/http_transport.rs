//! End-to-end checks of the HTTP provider against a minimal in-process
//! server: header placement, retry classification, and error mapping.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::time::Duration;

use mifc::error::Error;
use mifc::llm::{ChatProvider, Client, ProviderConfig};

struct ReceivedRequest {
    headers: String,
    body: String,
}

/// Serve `responses` (status, body) pairs on a fresh port, one per incoming
/// request, reporting each request back on a channel.
fn serve(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<ReceivedRequest>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buffer = Vec::new();
            let mut chunk = [0u8; 4096];
            let header_end = loop {
                let n = stream.read(&mut chunk).unwrap();
                buffer.extend_from_slice(&chunk[..n]);
                if let Some(pos) = find_header_end(&buffer) {
                    break pos;
                }
            };
            let headers = String::from_utf8_lossy(&buffer[..header_end]).to_string();
            let content_length = headers
                .lines()
                .find_map(|line| line.to_ascii_lowercase().strip_prefix("content-length:").map(str::trim).map(String::from))
                .and_then(|v| v.parse::<usize>().ok())
                .unwrap_or(0);
            let mut body_bytes = buffer[header_end + 4..].to_vec();
            while body_bytes.len() < content_length {
                let n = stream.read(&mut chunk).unwrap();
                body_bytes.extend_from_slice(&chunk[..n]);
            }
            tx.send(ReceivedRequest {
                headers,
                body: String::from_utf8_lossy(&body_bytes).to_string(),
            })
            .unwrap();
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}"), rx)
}

fn find_header_end(buffer: &[u8]) -> Option<usize> {
    buffer.windows(4).position(|w| w == b"\r\n\r\n")
}

fn completion_body(content: &str) -> String {
    serde_json::json!({
        "choices": [{ "message": { "role": "assistant", "content": content } }],
        "usage": { "prompt_tokens": 5, "completion_tokens": 2 },
    })
    .to_string()
}

fn config(base_url: &str, key_env: &str, max_retries: u32) -> ProviderConfig {
    ProviderConfig {
        base_url: base_url.to_string(),
        model_name: "test-model".to_string(),
        api_key_env: key_env.to_string(),
        timeout_secs: 5,
        max_retries,
        max_in_flight: 2,
        temperature: 0.0,
    }
}

#[test]
fn key_travels_in_the_auth_header_only() {
    std::env::set_var("MIFC_TEST_KEY_A", "sk-sekret-123");
    let (base_url, rx) = serve(vec![(200, completion_body("pong"))]);
    let client = Client::from_config(&config(&format!("{base_url}/v1"), "MIFC_TEST_KEY_A", 0)).unwrap();
    let exchange = client.complete("ping", 0.3).unwrap();
    assert_eq!(exchange.response, "pong");
    assert_eq!(exchange.usage.as_ref().unwrap().prompt_tokens, 5);
    assert_eq!(exchange.attempt, 1);

    let request = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    assert!(request.headers.contains("POST /v1/chat/completions"));
    assert!(request.headers.contains("Bearer sk-sekret-123"));
    assert!(!request.body.contains("sk-sekret-123"), "key leaked into body: {}", request.body);
    let body: serde_json::Value = serde_json::from_str(&request.body).unwrap();
    assert_eq!(body["model"], "test-model");
    assert_eq!(body["messages"][0]["content"], "ping");
    assert_eq!(body["temperature"], 0.3);
}

#[test]
fn transient_5xx_is_retried_verbatim() {
    std::env::set_var("MIFC_TEST_KEY_B", "k");
    let (base_url, rx) = serve(vec![
        (503, "overloaded".to_string()),
        (429, "slow down".to_string()),
        (200, completion_body("finally")),
    ]);
    let client = Client::from_config(&config(&format!("{base_url}/v1"), "MIFC_TEST_KEY_B", 3))
        .unwrap()
        .with_backoff_base(Duration::from_millis(1));
    let exchange = client.complete("hello", 0.0).unwrap();
    assert_eq!(exchange.response, "finally");
    assert_eq!(exchange.attempt, 3);

    let first = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    let second = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    let third = rx.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(first.body, second.body, "retries must re-send the request verbatim");
    assert_eq!(second.body, third.body);
}

#[test]
fn non_retryable_4xx_fails_immediately() {
    std::env::set_var("MIFC_TEST_KEY_C", "k");
    let (base_url, rx) = serve(vec![(400, "bad request".to_string())]);
    let client = Client::from_config(&config(&format!("{base_url}/v1"), "MIFC_TEST_KEY_C", 5))
        .unwrap()
        .with_backoff_base(Duration::from_millis(1));
    let err = client.complete("hello", 0.0).unwrap_err();
    assert!(matches!(err, Error::Transport(_)));
    assert!(err.to_string().contains("400"));
    // Exactly one request reached the server.
    rx.recv_timeout(Duration::from_secs(5)).unwrap();
    assert!(rx.recv_timeout(Duration::from_millis(200)).is_err());
}

#[test]
fn missing_api_key_is_a_config_error() {
    let err = match Client::from_config(&config("http://127.0.0.1:1", "MIFC_TEST_KEY_UNSET", 0)) {
        Ok(_) => panic!("client built without an API key"),
        Err(err) => err,
    };
    assert!(matches!(err, Error::Config(_)));
    assert_eq!(err.exit_code(), 3);
}
