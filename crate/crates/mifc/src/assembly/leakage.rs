//! Train/test contamination check: probe samples drawn from the knowledge
//! dataset must not appear in the task dataset's train or test split.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DataSample, LanguageTag};

use super::dedup::{dedup_key, jaccard, shingle_set, NEAR_DUP_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchKind {
    Exact,
    Near,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub probe_id: String,
    /// Which split the probe collided with: `mc_train` or `mc_test`.
    pub target_set: String,
    pub target_id: String,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub probes_per_language: u32,
    /// Sampled probe ids per language, in draw order (seed-deterministic).
    pub probes: BTreeMap<LanguageTag, Vec<String>>,
    /// Languages with fewer samples than requested probes: actual count used.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub shortfalls: BTreeMap<LanguageTag, u32>,
    pub collisions: Vec<Collision>,
    pub pass: bool,
}

struct Target<'a> {
    name: &'static str,
    exact: HashMap<String, &'a str>,
    entries: Vec<(&'a str, HashSet<u64>)>,
}

impl<'a> Target<'a> {
    fn build(name: &'static str, samples: &'a [DataSample]) -> Self {
        let mut exact = HashMap::new();
        let mut entries = Vec::with_capacity(samples.len());
        for sample in samples {
            let key = dedup_key(sample);
            entries.push((sample.id.as_str(), shingle_set(&key)));
            exact.entry(key).or_insert(sample.id.as_str());
        }
        Target { name, exact, entries }
    }

    /// At most one collision per (probe, target sample): exact wins over near.
    fn collide(&self, probe_id: &str, key: &str, shingles: &HashSet<u64>) -> Vec<Collision> {
        let mut collisions = Vec::new();
        let exact_hit = self.exact.get(key).copied();
        if let Some(target_id) = exact_hit {
            collisions.push(Collision {
                probe_id: probe_id.to_string(),
                target_set: self.name.to_string(),
                target_id: target_id.to_string(),
                kind: MatchKind::Exact,
            });
        }
        for (target_id, target_shingles) in &self.entries {
            if exact_hit == Some(*target_id) {
                continue;
            }
            if jaccard(shingles, target_shingles) >= NEAR_DUP_THRESHOLD {
                collisions.push(Collision {
                    probe_id: probe_id.to_string(),
                    target_set: self.name.to_string(),
                    target_id: target_id.to_string(),
                    kind: MatchKind::Near,
                });
            }
        }
        collisions
    }
}

/// Draw `probes_per_language` seeded uniform probes per language from `ift`
/// and compare each against both MC splits, exact and near-dup.
pub fn check_leakage(
    ift: &[DataSample],
    mc_train: &[DataSample],
    mc_test: &[DataSample],
    probes_per_language: u32,
    seed: u64,
) -> Result<LeakageReport> {
    if probes_per_language < 1 {
        return Err(Error::config("probes_per_language must be at least 1"));
    }
    let mut by_language: BTreeMap<LanguageTag, Vec<usize>> = BTreeMap::new();
    for (idx, sample) in ift.iter().enumerate() {
        by_language.entry(sample.lang).or_default().push(idx);
    }

    let train_target = Target::build("mc_train", mc_train);
    let test_target = Target::build("mc_test", mc_test);

    let mut probes = BTreeMap::new();
    let mut shortfalls = BTreeMap::new();
    let mut collisions = Vec::new();
    for (lang_index, (lang, indices)) in by_language.into_iter().enumerate() {
        let want = probes_per_language as usize;
        let take = want.min(indices.len());
        if take < want {
            shortfalls.insert(lang, take as u32);
        }
        let chosen = sample_indices(&indices, take, seed, lang_index as u64);
        let mut probe_ids = Vec::with_capacity(take);
        for ift_index in chosen {
            let probe = &ift[ift_index];
            let key = dedup_key(probe);
            let shingles = shingle_set(&key);
            collisions.extend(train_target.collide(&probe.id, &key, &shingles));
            collisions.extend(test_target.collide(&probe.id, &key, &shingles));
            probe_ids.push(probe.id.clone());
        }
        probes.insert(lang, probe_ids);
    }

    let pass = collisions.is_empty();
    Ok(LeakageReport { probes_per_language, probes, shortfalls, collisions, pass })
}

/// Partial Fisher-Yates draw of `take` indices, decorrelated per language.
fn sample_indices(indices: &[usize], take: usize, seed: u64, lang_index: u64) -> Vec<usize> {
    let mut pool: Vec<usize> = indices.to_vec();
    let stream = seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(lang_index + 1));
    let mut rng = ChaCha8Rng::seed_from_u64(stream);
    let n = pool.len();
    for i in 0..take.min(n) {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}
