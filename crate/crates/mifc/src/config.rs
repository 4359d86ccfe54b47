//! The shared pipeline configuration file (`--config cfg.json`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::FilterConfig;
use crate::llm::ProviderConfig;
use crate::metrics::{CctsConfig, EmbeddingProvider, HashEmbedder, HttpEmbedder};
use crate::pipeline::JudgeConfig;
use crate::util::sha256_hex;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub ccts: CctsConfig,
    #[serde(default)]
    pub judge: JudgeConfig,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    /// Size of the worker pool LLM-backed stages run on.
    #[serde(default = "default_concurrency_limit")]
    pub concurrency_limit: usize,
    /// Seed for every sampling decision (leakage probes, jitter-free paths).
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_concurrency_limit() -> usize {
    4
}

fn default_seed() -> u64 {
    0
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterConfig::default(),
            ccts: CctsConfig::default(),
            judge: JudgeConfig::default(),
            provider: ProviderConfig::default(),
            embedding: EmbeddingConfig::default(),
            concurrency_limit: default_concurrency_limit(),
            seed: default_seed(),
        }
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig::new(Vec::new())
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = crate::util::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Validates the nested configs. The filter keyword list is allowed to be
    /// empty here; the filter stage validates it when actually used.
    pub fn validate(&self) -> Result<()> {
        if !self.filter.keywords.is_empty() {
            self.filter.validate()?;
        }
        self.ccts.validate()?;
        self.judge.validate()?;
        self.provider.validate()?;
        self.embedding.validate()?;
        if self.concurrency_limit < 1 {
            return Err(Error::config("concurrency_limit must be at least 1"));
        }
        Ok(())
    }

    /// Digest of the canonical JSON form, recorded in manifests and reports.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialization cannot fail");
        sha256_hex(&canonical)
    }

    pub fn embedder(&self) -> Result<Box<dyn EmbeddingProvider>> {
        self.embedding.build(self.seed)
    }
}

/// Which embedding backend scores the BERT-style CCTS component.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EmbeddingConfig {
    /// Seeded hash-based unit vectors; fully offline and deterministic.
    TestDeterministic {
        #[serde(default = "default_embed_dim")]
        dim: usize,
    },
    /// Remote `POST {base_url}/embeddings` endpoint.
    Http {
        base_url: String,
        model: String,
        #[serde(default = "default_embed_key_env")]
        api_key_env: String,
        #[serde(default = "default_embed_timeout_secs")]
        timeout_secs: u64,
    },
}

fn default_embed_dim() -> usize {
    64
}

fn default_embed_key_env() -> String {
    crate::llm::DEFAULT_API_KEY_ENV.to_string()
}

fn default_embed_timeout_secs() -> u64 {
    60
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig::TestDeterministic { dim: default_embed_dim() }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            EmbeddingConfig::TestDeterministic { dim } => {
                if *dim == 0 || dim % 4 != 0 {
                    return Err(Error::config(
                        "embedding dim must be a positive multiple of 4",
                    ));
                }
            }
            EmbeddingConfig::Http { base_url, .. } => {
                if base_url.is_empty() {
                    return Err(Error::config("embedding base_url must be non-empty"));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn EmbeddingProvider>> {
        match self {
            EmbeddingConfig::TestDeterministic { dim } => Ok(Box::new(HashEmbedder::new(seed, *dim))),
            EmbeddingConfig::Http { base_url, model, api_key_env, timeout_secs } => {
                Ok(Box::new(HttpEmbedder::new(
                    base_url.clone(),
                    model.clone(),
                    api_key_env.clone(),
                    std::time::Duration::from_secs(*timeout_secs),
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_object() {
        let cfg = PipelineConfig::from_json("{}").unwrap();
        assert_eq!(cfg.concurrency_limit, 4);
        assert_eq!(cfg.ccts.accept_threshold, 0.8);
        assert!(matches!(cfg.embedding, EmbeddingConfig::TestDeterministic { dim: 64 }));
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let a = PipelineConfig::default();
        let mut b = PipelineConfig::default();
        assert_eq!(a.digest(), b.digest());
        b.seed = 99;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn bad_nested_config_is_rejected() {
        let err = PipelineConfig::from_json(r#"{"concurrency_limit":0}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err =
            PipelineConfig::from_json(r#"{"ccts":{"lambda1":0.0,"lambda2":0.0}}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
