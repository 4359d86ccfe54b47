//! Exact and near-duplicate removal.
//!
//! Exact matching compares whitespace-collapsed lowercase text; near-dup
//! matching uses Jaccard similarity over character 5-gram sets at a 0.9
//! threshold, which works across scripts. First occurrence wins and input
//! order is preserved.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::types::{DataSample, SampleKind};

pub const SHINGLE_SIZE: usize = 5;
pub const NEAR_DUP_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DedupReport {
    pub exact_dups_removed: u64,
    pub near_dups_removed: u64,
}

/// Lowercase, collapse whitespace runs to single spaces, trim.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.trim().chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            for lower in c.to_lowercase() {
                out.push(lower);
            }
        }
    }
    out
}

/// The normalized comparison key of a sample: `question ⊕ " " ⊕ answer` for
/// QA records, the raw text otherwise.
pub fn dedup_key(sample: &DataSample) -> String {
    let text = match sample.kind {
        SampleKind::RawText => sample.raw_text.clone().unwrap_or_default(),
        _ => format!(
            "{} {}",
            sample.question.as_deref().unwrap_or_default(),
            sample.answer.as_deref().unwrap_or_default()
        ),
    };
    normalize_text(&text)
}

/// Hashed character n-gram set of a normalized text. Texts shorter than the
/// shingle size contribute a single whole-text shingle.
pub fn shingle_set(normalized: &str) -> HashSet<u64> {
    let chars: Vec<char> = normalized.chars().collect();
    let mut shingles = HashSet::new();
    if chars.len() < SHINGLE_SIZE {
        shingles.insert(hash_chars(&chars));
        return shingles;
    }
    for window in chars.windows(SHINGLE_SIZE) {
        shingles.insert(hash_chars(window));
    }
    shingles
}

fn hash_chars(chars: &[char]) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for c in chars {
        c.hash(&mut hasher);
    }
    hasher.finish()
}

pub fn jaccard(a: &HashSet<u64>, b: &HashSet<u64>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

/// Remove exact and near duplicates, keeping first occurrences.
pub fn dedup(samples: Vec<DataSample>) -> (Vec<DataSample>, DedupReport) {
    let mut report = DedupReport::default();
    let mut unique = Vec::new();
    let mut seen_exact: HashSet<String> = HashSet::new();
    // (shingles, size) of every kept sample, for the near-dup scan.
    let mut kept_shingles: Vec<HashSet<u64>> = Vec::new();

    for sample in samples {
        let key = dedup_key(&sample);
        if !seen_exact.insert(key.clone()) {
            report.exact_dups_removed += 1;
            continue;
        }
        let shingles = shingle_set(&key);
        // J(A,B) ≥ t requires |A|/|B| ∈ [t, 1/t]; skip size-incompatible pairs.
        let near_dup = kept_shingles.iter().any(|kept| {
            let (small, large) = if kept.len() < shingles.len() {
                (kept.len(), shingles.len())
            } else {
                (shingles.len(), kept.len())
            };
            small as f64 >= NEAR_DUP_THRESHOLD * large as f64
                && jaccard(kept, &shingles) >= NEAR_DUP_THRESHOLD
        });
        if near_dup {
            report.near_dups_removed += 1;
            continue;
        }
        kept_shingles.push(shingles);
        unique.push(sample);
    }
    (unique, report)
}
