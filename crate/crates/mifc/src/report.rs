//! Per-run report files: every processing command writes one
//! `<out>.report.json` recording what went in, what came out, and under
//! which configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pipeline::StageReport;
use crate::util::{sha256_file, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub counts: BTreeMap<String, u64>,
    pub duration_ms: u64,
    pub config_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<StageReport>,
}

impl RunReport {
    pub fn new(command: &str, config_digest: String) -> Self {
        RunReport {
            command: command.to_string(),
            inputs: Vec::new(),
            counts: BTreeMap::new(),
            duration_ms: 0,
            config_digest,
            stage: None,
        }
    }

    pub fn add_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn count(&mut self, key: &str, value: u64) {
        self.counts.insert(key.to_string(), value);
    }

    pub fn with_stage(&mut self, stage: &StageReport) {
        self.counts.insert("inputs".into(), stage.inputs as u64);
        self.counts.insert("accepted".into(), stage.accepted as u64);
        self.counts.insert("rejected".into(), stage.rejected as u64);
        self.counts.insert("errors".into(), stage.errors as u64);
        self.stage = Some(stage.clone());
    }

    /// Write to `<out>.report.json`, next to the primary output.
    pub fn write_beside(&self, primary_output: impl AsRef<Path>) -> Result<()> {
        let primary = primary_output.as_ref();
        let path = primary.with_file_name(format!(
            "{}.report.json",
            primary.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
        ));
        self.write_to(path)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self).expect("report serialization");
        json.push('\n');
        write_atomic(path, json.as_bytes())
    }
}
