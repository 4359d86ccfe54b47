//! File-backed record/replay providers.
//!
//! A replay file is JSONL of [`ChatExchange`] records. [`RecordingProvider`]
//! appends every successful exchange of an inner provider;
//! [`ReplayProvider`] serves recorded responses back, FIFO per distinct
//! prompt, filtered by model label. Running a pipeline under replay is fully
//! offline and byte-reproducible.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

use super::{ChatExchange, ChatProvider};

/// Read all exchanges from a replay file.
pub fn read_exchanges(path: impl AsRef<Path>) -> Result<Vec<ChatExchange>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut exchanges = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::format(e.to_string()).at_line(idx + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let exchange: ChatExchange = serde_json::from_str(&line)
            .map_err(|e| Error::format(format!("{}: {e}", path.display())).at_line(idx + 1))?;
        exchanges.push(exchange);
    }
    Ok(exchanges)
}

/// Serves recorded responses for one model label.
pub struct ReplayProvider {
    label: String,
    queues: Mutex<HashMap<String, VecDeque<ChatExchange>>>,
}

impl ReplayProvider {
    /// Load every exchange in `path` whose model equals `label`.
    pub fn from_file(path: impl AsRef<Path>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let mut queues: HashMap<String, VecDeque<ChatExchange>> = HashMap::new();
        for exchange in read_exchanges(path)? {
            if exchange.model == label {
                queues.entry(exchange.request.clone()).or_default().push_back(exchange);
            }
        }
        Ok(ReplayProvider { label, queues: Mutex::new(queues) })
    }

    pub fn from_exchanges(label: impl Into<String>, exchanges: Vec<ChatExchange>) -> Self {
        let label = label.into();
        let mut queues: HashMap<String, VecDeque<ChatExchange>> = HashMap::new();
        for exchange in exchanges {
            if exchange.model == label {
                queues.entry(exchange.request.clone()).or_default().push_back(exchange);
            }
        }
        ReplayProvider { label, queues: Mutex::new(queues) }
    }
}

impl ChatProvider for ReplayProvider {
    fn complete(&self, prompt: &str, _temperature: f64) -> Result<ChatExchange> {
        let mut queues = self.queues.lock().unwrap();
        match queues.get_mut(prompt).and_then(VecDeque::pop_front) {
            Some(exchange) => Ok(exchange),
            None => Err(Error::transport(format!(
                "replay miss for model {:?}: no recorded response for prompt starting {:?}",
                self.label,
                prompt.chars().take(60).collect::<String>()
            ))),
        }
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Shared append target so the generator and every judge can record into the
/// same replay file without interleaving partial lines.
#[derive(Clone)]
pub struct RecordingSink {
    file: Arc<Mutex<File>>,
}

impl RecordingSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(RecordingSink { file: Arc::new(Mutex::new(file)) })
    }

    pub fn wrap<P: ChatProvider>(&self, inner: P) -> RecordingProvider<P> {
        RecordingProvider { inner, sink: self.clone() }
    }

    fn append(&self, exchange: &ChatExchange) -> Result<()> {
        let line = serde_json::to_string(exchange).expect("exchange serialization cannot fail");
        let mut file = self.file.lock().unwrap();
        writeln!(file, "{line}").map_err(|e| Error::io("replay sink", e))
    }
}

/// Wraps a provider and appends every successful exchange to the sink.
pub struct RecordingProvider<P> {
    inner: P,
    sink: RecordingSink,
}

impl<P: ChatProvider> RecordingProvider<P> {
    pub fn create(inner: P, path: impl AsRef<Path>) -> Result<Self> {
        Ok(RecordingSink::create(path)?.wrap(inner))
    }
}

impl<P: ChatProvider> ChatProvider for RecordingProvider<P> {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<ChatExchange> {
        let exchange = self.inner.complete(prompt, temperature)?;
        self.sink.append(&exchange)?;
        Ok(exchange)
    }

    fn label(&self) -> &str {
        self.inner.label()
    }
}

#[cfg(test)]
mod tests {
    use super::super::testing::FnProvider;
    use super::*;

    #[test]
    fn record_then_replay_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("replay.jsonl");
        {
            let inner = FnProvider::new("gen", |prompt| Ok(format!("echo: {prompt}")));
            let recorder = RecordingProvider::create(inner, &path).unwrap();
            recorder.complete("first", 0.0).unwrap();
            recorder.complete("second", 0.0).unwrap();
        }
        let replay = ReplayProvider::from_file(&path, "gen").unwrap();
        assert_eq!(replay.complete("second", 0.0).unwrap().response, "echo: second");
        assert_eq!(replay.complete("first", 0.0).unwrap().response, "echo: first");
        let err = replay.complete("first", 0.0).unwrap_err();
        assert!(err.to_string().contains("replay miss"));
    }

    #[test]
    fn replay_is_fifo_per_prompt_and_filtered_by_label() {
        let make = |model: &str, response: &str| ChatExchange {
            model: model.into(),
            request: "p".into(),
            response: response.into(),
            usage: None,
            latency_ms: 0,
            attempt: 1,
        };
        let exchanges = vec![make("a", "first"), make("b", "other"), make("a", "second")];
        let replay = ReplayProvider::from_exchanges("a", exchanges);
        assert_eq!(replay.complete("p", 0.0).unwrap().response, "first");
        assert_eq!(replay.complete("p", 0.0).unwrap().response, "second");
        assert!(replay.complete("p", 0.0).is_err());
    }
}
