//! Translation-quality metrics: sentence BLEU, greedy embedding similarity,
//! and the composite cycle-consistency translation score
//! `CCTS = λ1 · (1/4 Σ BLEU_i) + λ2 · EmbedF1` used to gate back-translations.

mod bleu;
mod embed;

pub use bleu::{bleu, bleu_from_tokens, BleuScore};
pub use embed::{embed_similarity, EmbeddingProvider, HashEmbedder, HttpEmbedder};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::LanguageTag;

/// Tokenization granularity for the metric components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenizerMode {
    /// Split on whitespace; punctuation runs become their own tokens.
    Whitespace,
    /// One token per non-whitespace Unicode scalar value.
    Character,
}

impl TokenizerMode {
    /// Default mode for a language: whitespace for EN/FR/ES, character for
    /// ZH/JA. Korean uses whitespace when the text contains any, falling back
    /// to characters for unsegmented text.
    pub fn resolve(lang: LanguageTag, text: &str) -> TokenizerMode {
        match lang {
            LanguageTag::En | LanguageTag::Fr | LanguageTag::Es => TokenizerMode::Whitespace,
            LanguageTag::Zh | LanguageTag::Ja => TokenizerMode::Character,
            LanguageTag::Ko => {
                if text.chars().any(char::is_whitespace) {
                    TokenizerMode::Whitespace
                } else {
                    TokenizerMode::Character
                }
            }
        }
    }
}

/// Split text into metric tokens.
pub fn tokenize(text: &str, mode: TokenizerMode) -> Vec<String> {
    match mode {
        TokenizerMode::Character => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| c.to_string())
            .collect(),
        TokenizerMode::Whitespace => {
            let mut tokens = Vec::new();
            let mut current = String::new();
            let is_word = |c: char| c.is_alphanumeric() || c == '_' || c == '\'';
            for c in text.chars() {
                if c.is_whitespace() {
                    if !current.is_empty() {
                        tokens.push(std::mem::take(&mut current));
                    }
                } else if is_word(c) {
                    current.push(c);
                } else {
                    if !current.is_empty() {
                        tokens.push(std::mem::take(&mut current));
                    }
                    tokens.push(c.to_string());
                }
            }
            if !current.is_empty() {
                tokens.push(current);
            }
            tokens
        }
    }
}

/// Weights and gate for the composite score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CctsConfig {
    /// Weight of the mean-BLEU component.
    #[serde(default = "default_lambda")]
    pub lambda1: f64,
    /// Weight of the embedding-similarity component.
    #[serde(default = "default_lambda")]
    pub lambda2: f64,
    /// Round trips scoring strictly above this are accepted.
    #[serde(default = "default_accept_threshold")]
    pub accept_threshold: f64,
    /// Fixed tokenizer; absent means per-language defaults
    /// (see [`TokenizerMode::resolve`]).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer_mode: Option<TokenizerMode>,
}

fn default_lambda() -> f64 {
    0.5
}

fn default_accept_threshold() -> f64 {
    0.8
}

impl Default for CctsConfig {
    fn default() -> Self {
        CctsConfig {
            lambda1: default_lambda(),
            lambda2: default_lambda(),
            accept_threshold: default_accept_threshold(),
            tokenizer_mode: None,
        }
    }
}

impl CctsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::config("ccts weights must be non-negative"));
        }
        if self.lambda1 + self.lambda2 <= 0.0 {
            return Err(Error::config("ccts weights must not both be zero"));
        }
        if self.accept_threshold < 0.0 {
            return Err(Error::config("ccts accept_threshold must be non-negative"));
        }
        Ok(())
    }

    /// Tokenizer for a given source text: the configured mode if fixed,
    /// otherwise the language default.
    pub fn mode_for(&self, lang: LanguageTag, text: &str) -> TokenizerMode {
        self.tokenizer_mode.unwrap_or_else(|| TokenizerMode::resolve(lang, text))
    }
}

/// A CCTS evaluation with its components, kept for audit annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CctsScore {
    pub bleu_mean: f64,
    pub embed_score: f64,
    pub value: f64,
}

/// Score the similarity of a source text and its round-trip back-translation.
pub fn ccts(
    source: &str,
    back_translated: &str,
    cfg: &CctsConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<CctsScore> {
    let mode = cfg.tokenizer_mode.unwrap_or(TokenizerMode::Whitespace);
    ccts_with_mode(source, back_translated, cfg, provider, mode)
}

/// As [`ccts`], with the tokenizer chosen by the caller (used by the
/// translation stage, which resolves the mode from the source language).
pub fn ccts_with_mode(
    source: &str,
    back_translated: &str,
    cfg: &CctsConfig,
    provider: &dyn EmbeddingProvider,
    mode: TokenizerMode,
) -> Result<CctsScore> {
    cfg.validate()?;
    let bleu_score = bleu(back_translated, source, mode)?;
    let embed_score = embed_similarity(back_translated, source, provider, mode)?;
    Ok(CctsScore {
        bleu_mean: bleu_score.mean,
        embed_score,
        value: cfg.lambda1 * bleu_score.mean + cfg.lambda2 * embed_score,
    })
}
