//! Knowledge-density filtering.
//!
//! A sample is kept when the keyword-coverage ratio
//! `R = Σ_k len(k) · cnt(k, T) / len(T)` exceeds `thres1` AND the number of
//! distinct matched keywords exceeds `thres2` (both strict). Lengths are
//! measured in Unicode scalar values so the ratio is unit-consistent across
//! scripts; occurrence counting is non-overlapping, left-to-right greedy per
//! keyword, and case-insensitive.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::DataSample;

/// How keywords are located in text.
///
/// `WordBoundary` (EN/FR/ES) requires Unicode word boundaries around the
/// match; `Substring` (ZH/JA/KO) counts plain substring occurrences since
/// whitespace tokenization fails on unsegmented scripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    WordBoundary,
    Substring,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterConfig {
    /// The reference keyword list (user-supplied; typically ~200 terms).
    pub keywords: Vec<String>,
    /// Threshold on the coverage ratio R, in [0, 1].
    #[serde(default = "default_thres1")]
    pub thres1: f64,
    /// Threshold on the unique-keyword count.
    #[serde(default = "default_thres2")]
    pub thres2: u32,
    #[serde(default = "default_match_mode")]
    pub match_mode: MatchMode,
}

fn default_thres1() -> f64 {
    0.05
}

fn default_thres2() -> u32 {
    2
}

fn default_match_mode() -> MatchMode {
    MatchMode::WordBoundary
}

impl FilterConfig {
    pub fn new(keywords: Vec<String>) -> Self {
        FilterConfig {
            keywords,
            thres1: default_thres1(),
            thres2: default_thres2(),
            match_mode: default_match_mode(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.keywords.is_empty() {
            return Err(Error::config("filter keyword list must be non-empty"));
        }
        if self.keywords.iter().any(|k| k.trim().is_empty()) {
            return Err(Error::config("filter keywords must be non-empty after trimming"));
        }
        if !(0.0..=1.0).contains(&self.thres1) {
            return Err(Error::config(format!(
                "filter thres1 must lie in [0, 1], got {}",
                self.thres1
            )));
        }
        Ok(())
    }
}

/// Per-sample filter outcome, kept as an audit record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    /// Coverage ratio R.
    pub ratio: f64,
    /// Number of distinct keywords with at least one occurrence.
    pub unique_keywords: usize,
    /// (keyword, occurrence count) for every matched keyword, in list order.
    pub matched: Vec<(String, usize)>,
    /// Text length in Unicode scalar values.
    pub text_length: usize,
    pub kept: bool,
}

/// Keyword set compiled for repeated scoring.
pub struct KeywordMatcher {
    entries: Vec<KeywordEntry>,
    thres1: f64,
    thres2: u32,
}

struct KeywordEntry {
    keyword: String,
    /// len(k) in Unicode scalar values of the configured keyword.
    char_len: usize,
    pattern: KeywordPattern,
}

enum KeywordPattern {
    Boundary(Regex),
    Lowercased(String),
}

impl KeywordMatcher {
    pub fn new(cfg: &FilterConfig) -> Result<Self> {
        cfg.validate()?;
        let mut entries = Vec::with_capacity(cfg.keywords.len());
        for raw in &cfg.keywords {
            let keyword = raw.trim().to_string();
            let pattern = match cfg.match_mode {
                MatchMode::WordBoundary => {
                    let re = Regex::new(&format!(r"(?i)\b{}\b", regex::escape(&keyword)))
                        .map_err(|e| Error::config(format!("keyword {keyword:?}: {e}")))?;
                    KeywordPattern::Boundary(re)
                }
                MatchMode::Substring => KeywordPattern::Lowercased(keyword.to_lowercase()),
            };
            entries.push(KeywordEntry { char_len: keyword.chars().count(), keyword, pattern });
        }
        Ok(KeywordMatcher { entries, thres1: cfg.thres1, thres2: cfg.thres2 })
    }

    pub fn score(&self, text: &str) -> Result<FilterReport> {
        let text_length = text.chars().count();
        if text_length == 0 {
            return Err(Error::validation("cannot score empty text (len(T) = 0)"));
        }
        let lowered = text.to_lowercase();
        let mut matched = Vec::new();
        let mut covered_chars = 0usize;
        for entry in &self.entries {
            let count = match &entry.pattern {
                KeywordPattern::Boundary(re) => re.find_iter(text).count(),
                KeywordPattern::Lowercased(kw) => lowered.match_indices(kw.as_str()).count(),
            };
            if count > 0 {
                covered_chars += entry.char_len * count;
                matched.push((entry.keyword.clone(), count));
            }
        }
        let ratio = covered_chars as f64 / text_length as f64;
        let unique_keywords = matched.len();
        let kept = ratio > self.thres1 && unique_keywords > self.thres2 as usize;
        Ok(FilterReport { ratio, unique_keywords, matched, text_length, kept })
    }
}

/// Score one text against a keyword list. Convenience wrapper that compiles
/// the keywords on each call; use [`KeywordMatcher`] for streams.
pub fn score_sample(text: &str, cfg: &FilterConfig) -> Result<FilterReport> {
    KeywordMatcher::new(cfg)?.score(text)
}

/// Partition samples by the keep rule, preserving input order in both
/// outputs. Every sample gains `filter.R`, `filter.uni_k`, and `filter.kept`
/// annotations; samples that cannot be scored go to `rejected` with a
/// `filter.error` annotation instead of aborting the stream.
pub fn filter_stream(
    samples: Vec<DataSample>,
    cfg: &FilterConfig,
) -> Result<(Vec<DataSample>, Vec<DataSample>)> {
    let matcher = KeywordMatcher::new(cfg)?;
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for mut sample in samples {
        let outcome = sample.scoring_text().and_then(|text| matcher.score(&text));
        match outcome {
            Ok(report) => {
                sample.annotate("filter.R", report.ratio);
                sample.annotate("filter.uni_k", report.unique_keywords);
                sample.annotate("filter.kept", report.kept);
                if report.kept {
                    kept.push(sample);
                } else {
                    rejected.push(sample);
                }
            }
            Err(err) => {
                sample.annotate("filter.error", err.to_string());
                sample.annotate("filter.kept", false);
                rejected.push(sample);
            }
        }
    }
    Ok((kept, rejected))
}
