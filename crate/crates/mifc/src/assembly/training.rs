//! Two-stage training manifest emission.
//!
//! Stage 1 injects general medical knowledge (quantized DoRA over the full
//! IFT dataset, adapter merged into the base afterwards); stage 2 fine-tunes
//! on the MC dataset with QLoRA. Hyperparameters are fixed here, not
//! calibrated at run time.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::util::write_atomic;

use super::DatasetName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingStage {
    Stage1Knowledge,
    Stage2Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    DoraQuantized,
    Qlora,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    CosineToZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingStageConfig {
    pub stage: TrainingStage,
    pub adapter: AdapterKind,
    pub rank: u32,
    pub alpha: u32,
    pub dropout: f64,
    pub epochs: u32,
    pub batch_size: u32,
    pub learning_rate: f64,
    pub lr_schedule: LrSchedule,
    pub warmup_ratio: f64,
    pub grad_accum_steps: u32,
    pub dataset: DatasetName,
    /// Stage 1 merges the adapter into the base model so stage 2 starts from
    /// the knowledge-injected weights.
    pub merge_adapter_after: bool,
}

pub fn stage1_config() -> TrainingStageConfig {
    TrainingStageConfig {
        stage: TrainingStage::Stage1Knowledge,
        adapter: AdapterKind::DoraQuantized,
        rank: 32,
        alpha: 16,
        dropout: 0.05,
        epochs: 2,
        batch_size: 1,
        learning_rate: 5e-5,
        lr_schedule: LrSchedule::CosineToZero,
        warmup_ratio: 0.2,
        grad_accum_steps: 4,
        dataset: DatasetName::MmedIft,
        merge_adapter_after: true,
    }
}

pub fn stage2_config() -> TrainingStageConfig {
    TrainingStageConfig {
        rank: 16,
        alpha: 8,
        learning_rate: 2e-5,
        stage: TrainingStage::Stage2Mc,
        adapter: AdapterKind::Qlora,
        dataset: DatasetName::MmedIftMc,
        merge_adapter_after: false,
        ..stage1_config()
    }
}

/// Write `stage1.json` and `stage2.json` into `out_dir`.
pub fn emit_training_configs(out_dir: impl AsRef<Path>) -> Result<[TrainingStageConfig; 2]> {
    let out_dir = out_dir.as_ref();
    let configs = [stage1_config(), stage2_config()];
    for (config, name) in configs.iter().zip(["stage1.json", "stage2.json"]) {
        let mut json = serde_json::to_string_pretty(config).expect("config serialization");
        json.push('\n');
        write_atomic(out_dir.join(name), json.as_bytes())?;
    }
    Ok(configs)
}
