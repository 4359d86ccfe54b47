//! Sentence-level BLEU-1..4 with clipped n-gram precision and brevity penalty.
//!
//! Per-order precisions follow this convention:
//! - `p_n = clipped_matches / candidate_ngrams` when both are positive;
//! - if the candidate shares no unigram with the reference, every order is 0;
//! - add-one smoothing for n ≥ 2 when no n-gram matched: `p_n = 1/(total+1)`
//!   (unsmoothed sentence BLEU-4 is almost always 0 on short texts);
//! - orders longer than the candidate inherit the previous order's precision.
//!
//! A single brevity penalty `BP = min(1, exp(1 − r/c))` computed from total
//! lengths multiplies every order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{tokenize, TokenizerMode};

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    /// Clipped, smoothed per-order precisions before the brevity penalty.
    pub precisions: [f64; MAX_ORDER],
    /// Per-order scores after the brevity penalty (BLEU_1..BLEU_4).
    pub per_n: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    /// Equal-weight arithmetic mean of `per_n`.
    pub mean: f64,
}

/// Score a candidate against a reference.
pub fn bleu(candidate: &str, reference: &str, mode: TokenizerMode) -> Result<BleuScore> {
    let cand = tokenize(candidate, mode);
    let refr = tokenize(reference, mode);
    if cand.is_empty() || refr.is_empty() {
        return Err(Error::validation("bleu requires non-empty texts after tokenization"));
    }
    Ok(bleu_from_tokens(&cand, &refr))
}

/// Score pre-tokenized sequences. Both slices must be non-empty.
pub fn bleu_from_tokens<T: AsRef<str>>(candidate: &[T], reference: &[T]) -> BleuScore {
    assert!(!candidate.is_empty() && !reference.is_empty());
    let c = candidate.len() as f64;
    let r = reference.len() as f64;
    let brevity_penalty = (1.0 - r / c).exp().min(1.0);

    let mut precisions = [0.0; MAX_ORDER];
    let unigram_matches = clipped_matches(candidate, reference, 1);
    if unigram_matches > 0 {
        for n in 1..=MAX_ORDER {
            let total = candidate.len().saturating_sub(n - 1);
            precisions[n - 1] = if total == 0 {
                precisions[n - 2]
            } else {
                let matches = if n == 1 { unigram_matches } else { clipped_matches(candidate, reference, n) };
                if matches == 0 {
                    1.0 / (total as f64 + 1.0)
                } else {
                    matches as f64 / total as f64
                }
            };
        }
    }

    let mut per_n = [0.0; MAX_ORDER];
    for n in 0..MAX_ORDER {
        per_n[n] = brevity_penalty * precisions[n];
    }
    let mean = per_n.iter().sum::<f64>() / MAX_ORDER as f64;
    BleuScore { precisions, per_n, brevity_penalty, mean }
}

/// Σ_g min(count_cand(g), count_ref(g)) over n-grams of order `n`.
fn clipped_matches<T: AsRef<str>>(candidate: &[T], reference: &[T], n: usize) -> usize {
    if candidate.len() < n || reference.len() < n {
        return 0;
    }
    let mut ref_counts: HashMap<Vec<&str>, usize> = HashMap::new();
    for window in reference.windows(n) {
        let gram: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
        *ref_counts.entry(gram).or_insert(0) += 1;
    }
    let mut matches = 0;
    for window in candidate.windows(n) {
        let gram: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
        if let Some(remaining) = ref_counts.get_mut(&gram) {
            if *remaining > 0 {
                *remaining -= 1;
                matches += 1;
            }
        }
    }
    matches
}
