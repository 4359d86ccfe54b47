//! mifc — multilingual medical IFT corpus curation.
//!
//! A batch library (and `mifc` CLI) that turns raw multilingual medical text
//! and existing QA resources into quality-gated instruction fine-tuning
//! datasets: keyword-density filtering, LLM-backed answer expansion and QA
//! generation with judge gating, cycle-consistency-scored translation,
//! dataset assembly with dedup and leakage checks, and emission of the
//! two-stage training manifests.

pub mod assembly;
pub mod config;
pub mod error;
pub mod filtering;
pub mod llm;
pub mod metrics;
pub mod parsing;
pub mod pipeline;
pub mod report;
pub mod types;
pub mod util;

pub use config::{EmbeddingConfig, PipelineConfig};
pub use error::{Error, Result};
pub use types::{DataSample, LanguageTag, SampleKind, Scalar};
