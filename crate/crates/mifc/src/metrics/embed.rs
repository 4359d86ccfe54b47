//! Token-embedding similarity in the BERTScore style: greedy max-cosine
//! matching in both directions, combined as F1. No IDF weighting or baseline
//! rescaling.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::{tokenize, TokenizerMode};

/// Source of per-token embedding vectors.
///
/// Implementations must return one unit-norm vector per input token, all of
/// the same dimension, and must be safe to call concurrently.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>>;
}

/// Deterministic offline embedder: every token maps to a unit vector derived
/// from a SHA-256 stream of `(seed, token)`. Identical tokens always map to
/// identical vectors; distinct tokens land nearly orthogonal at the default
/// dimension. This is the `test-deterministic` provider of the config surface
/// and what keeps the metric tests network-free.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    seed: u64,
    dim: usize,
}

impl HashEmbedder {
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim > 0 && dim % 4 == 0, "dimension must be a positive multiple of 4");
        HashEmbedder { seed, dim }
    }

    fn vector(&self, token: &str) -> Vec<f64> {
        let mut components = Vec::with_capacity(self.dim);
        let mut block_index = 0u32;
        while components.len() < self.dim {
            let mut hasher = Sha256::new();
            hasher.update(self.seed.to_le_bytes());
            hasher.update(token.as_bytes());
            hasher.update(block_index.to_le_bytes());
            let digest = hasher.finalize();
            for chunk in digest.chunks_exact(8) {
                if components.len() == self.dim {
                    break;
                }
                let bits = u64::from_le_bytes(chunk.try_into().unwrap());
                // Map to [-1, 1).
                components.push(bits as f64 / (u64::MAX as f64 / 2.0) - 1.0);
            }
            block_index += 1;
        }
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            components[0] = 1.0;
        } else {
            for x in &mut components {
                *x /= norm;
            }
        }
        components
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(0, 64)
    }
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
        Ok(tokens.iter().map(|t| self.vector(t)).collect())
    }
}

/// Remote embedding endpoint speaking the common `POST {base}/embeddings`
/// shape. Vectors are re-normalized to unit length on receipt.
pub struct HttpEmbedder {
    base_url: String,
    model: String,
    api_key_env: String,
    timeout: std::time::Duration,
}

impl HttpEmbedder {
    pub fn new(
        base_url: impl Into<String>,
        model: impl Into<String>,
        api_key_env: impl Into<String>,
        timeout: std::time::Duration,
    ) -> Self {
        HttpEmbedder {
            base_url: base_url.into(),
            model: model.into(),
            api_key_env: api_key_env.into(),
            timeout,
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn embed(&self, tokens: &[String]) -> Result<Vec<Vec<f64>>> {
        let key = std::env::var(&self.api_key_env).map_err(|_| {
            Error::config(format!("embedding API key env var {} is not set", self.api_key_env))
        })?;
        let body = serde_json::json!({ "model": self.model, "input": tokens });
        let url = format!("{}/embeddings", self.base_url.trim_end_matches('/'));
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut response = agent
            .post(&url)
            .header("Authorization", &format!("Bearer {key}"))
            .header("Content-Type", "application/json")
            .send(body.to_string())
            .map_err(|e| Error::transport(format!("embedding request failed: {e}")))?;
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::transport(format!("embedding response unreadable: {e}")))?;
        let payload: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::transport(format!("embedding response not JSON: {e}")))?;
        let data = payload
            .get("data")
            .and_then(|d| d.as_array())
            .ok_or_else(|| Error::transport("embedding response missing `data` array"))?;
        if data.len() != tokens.len() {
            return Err(Error::transport(format!(
                "embedding response has {} vectors for {} tokens",
                data.len(),
                tokens.len()
            )));
        }
        let mut vectors = Vec::with_capacity(data.len());
        for entry in data {
            let raw = entry
                .get("embedding")
                .and_then(|e| e.as_array())
                .ok_or_else(|| Error::transport("embedding entry missing `embedding`"))?;
            let mut vector: Vec<f64> =
                raw.iter().map(|v| v.as_f64().unwrap_or(0.0)).collect();
            let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                for x in &mut vector {
                    *x /= norm;
                }
            }
            vectors.push(vector);
        }
        Ok(vectors)
    }
}

/// Greedy-matching F1 between two texts under `provider`.
///
/// Precision is the mean over candidate tokens of the best cosine against any
/// reference token; recall is symmetric; `F1 = 2PR/(P+R)` (0 when `P+R ≤ 0`),
/// clamped to `[-1, 1]`.
pub fn embed_similarity(
    candidate: &str,
    reference: &str,
    provider: &dyn EmbeddingProvider,
    mode: TokenizerMode,
) -> Result<f64> {
    let cand_tokens = tokenize(candidate, mode);
    let ref_tokens = tokenize(reference, mode);
    if cand_tokens.is_empty() || ref_tokens.is_empty() {
        return Err(Error::validation(
            "embed_similarity requires non-empty texts after tokenization",
        ));
    }
    let cand_vecs = provider.embed(&cand_tokens)?;
    let ref_vecs = provider.embed(&ref_tokens)?;
    check_vectors(&cand_vecs, cand_tokens.len())?;
    check_vectors(&ref_vecs, ref_tokens.len())?;
    if cand_vecs[0].len() != ref_vecs[0].len() {
        return Err(Error::validation("embedding dimensions differ between texts"));
    }

    let precision = greedy_mean_max(&cand_vecs, &ref_vecs);
    let recall = greedy_mean_max(&ref_vecs, &cand_vecs);
    if precision + recall <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * precision * recall / (precision + recall)).clamp(-1.0, 1.0))
}

fn check_vectors(vectors: &[Vec<f64>], expected: usize) -> Result<()> {
    if vectors.len() != expected {
        return Err(Error::validation(format!(
            "embedding provider returned {} vectors for {expected} tokens",
            vectors.len()
        )));
    }
    let dim = vectors[0].len();
    if dim == 0 {
        return Err(Error::validation("embedding provider returned empty vectors"));
    }
    for v in vectors {
        if v.len() != dim {
            return Err(Error::validation("embedding provider returned mixed dimensions"));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::validation(format!(
                "embedding provider returned non-unit vector (norm {norm})"
            )));
        }
    }
    Ok(())
}

fn greedy_mean_max(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    for v in from {
        let mut best = f64::NEG_INFINITY;
        for w in to {
            let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
            if dot > best {
                best = dot;
            }
        }
        total += best;
    }
    total / from.len() as f64
}
