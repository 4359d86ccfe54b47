//! Orchestration of the LLM-backed flows: answer expansion, two-step QA
//! generation with dual-judge gating, and cycle-consistency-gated
//! cross-lingual translation.
//!
//! Stage outputs are deterministic given deterministic providers: samples run
//! on a bounded worker pool and results are re-ordered to input order before
//! anything is written. Per-sample failures are routed to the rejected output
//! with an error annotation; a stream never aborts on one bad record.

mod expand;
mod genqa;
mod translate;

pub use expand::{expand_answers, ExpandOutcome};
pub use genqa::{generate_qa, GenQaOutcome};
pub use translate::{translate_with_gate, TranslateOutcome, TranslationRecord};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::llm::prompts::{PromptId, PromptTemplate};
use crate::llm::{ChatProvider, ProviderConfig};
use crate::parsing::{parse_judge, JudgeScores};
use crate::types::{DataSample, LanguageTag};

/// How multiple judges' criterion scores combine into one gate decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeAggregation {
    MeanAcrossJudges,
    MinAcrossJudges,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeConfig {
    /// One provider per judge model (the reference setup uses two).
    pub judges: Vec<ProviderConfig>,
    /// Every aggregated criterion must reach this for acceptance.
    #[serde(default = "default_criterion_threshold")]
    pub per_criterion_threshold: f64,
    #[serde(default = "default_aggregation")]
    pub aggregation: JudgeAggregation,
}

fn default_criterion_threshold() -> f64 {
    0.7
}

fn default_aggregation() -> JudgeAggregation {
    JudgeAggregation::MeanAcrossJudges
}

impl Default for JudgeConfig {
    fn default() -> Self {
        JudgeConfig {
            judges: vec![ProviderConfig { temperature: 0.0, ..ProviderConfig::default() }],
            per_criterion_threshold: default_criterion_threshold(),
            aggregation: default_aggregation(),
        }
    }
}

impl JudgeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.judges.is_empty() {
            return Err(Error::config("judge list must be non-empty"));
        }
        for judge in &self.judges {
            judge.validate()?;
        }
        if !(0.0..=1.0).contains(&self.per_criterion_threshold) {
            return Err(Error::config("per_criterion_threshold must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// The combined verdict of all judges on one generated pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeVerdict {
    pub per_judge: Vec<JudgeScores>,
    pub aggregated: JudgeScores,
    pub accepted: bool,
}

/// Combine per-judge scores criterion-wise.
pub fn aggregate_scores(scores: &[JudgeScores], mode: JudgeAggregation) -> JudgeScores {
    assert!(!scores.is_empty());
    let combine = |pick: fn(&JudgeScores) -> f64| -> f64 {
        match mode {
            JudgeAggregation::MeanAcrossJudges => {
                scores.iter().map(pick).sum::<f64>() / scores.len() as f64
            }
            JudgeAggregation::MinAcrossJudges => {
                scores.iter().map(pick).fold(f64::INFINITY, f64::min)
            }
        }
    };
    JudgeScores {
        logically_consistent: combine(|s| s.logically_consistent),
        factually_accurate: combine(|s| s.factually_accurate),
        sound_reasoning: combine(|s| s.sound_reasoning),
    }
}

/// Send one generated pair to every judge and gate on the aggregate.
///
/// A judge whose response fails to parse contributes zeros on all three
/// criteria; transport failures propagate as errors.
pub fn judge_pair(
    context: &str,
    qa_pair: &str,
    lang: LanguageTag,
    judges: &[&dyn ChatProvider],
    cfg: &JudgeConfig,
) -> Result<JudgeVerdict> {
    let template = PromptTemplate::get(PromptId::JudgeQa);
    let prompt = template.render(&[
        ("LANG", lang.english_name()),
        ("condensed_text", context),
        ("qa_pair", qa_pair),
    ])?;
    let mut per_judge = Vec::with_capacity(judges.len());
    for judge in judges {
        let exchange = judge.complete(&prompt, 0.0)?;
        let scores = parse_judge(&exchange.response).unwrap_or(JudgeScores::ZERO);
        per_judge.push(scores);
    }
    let aggregated = aggregate_scores(&per_judge, cfg.aggregation);
    let accepted = aggregated
        .as_array()
        .iter()
        .all(|&score| score >= cfg.per_criterion_threshold);
    Ok(JudgeVerdict { per_judge, aggregated, accepted })
}

/// Write a verdict into a sample's annotation map under `prefix`.
pub(crate) fn annotate_verdict(sample: &mut DataSample, prefix: &str, verdict: &JudgeVerdict) {
    let agg = &verdict.aggregated;
    sample.annotate(format!("{prefix}.logically_consistent"), agg.logically_consistent);
    sample.annotate(format!("{prefix}.factually_accurate"), agg.factually_accurate);
    sample.annotate(format!("{prefix}.sound_reasoning"), agg.sound_reasoning);
    sample.annotate(format!("{prefix}.accepted"), verdict.accepted);
    for (idx, scores) in verdict.per_judge.iter().enumerate() {
        sample.annotate(format!("{prefix}.{idx}.logically_consistent"), scores.logically_consistent);
        sample.annotate(format!("{prefix}.{idx}.factually_accurate"), scores.factually_accurate);
        sample.annotate(format!("{prefix}.{idx}.sound_reasoning"), scores.sound_reasoning);
    }
}

/// Render a QA sample in the generation block format so it can be judged the
/// same way freshly generated pairs are.
pub fn qa_block_text(sample: &DataSample) -> Result<String> {
    match sample.kind {
        crate::types::SampleKind::MultipleChoiceQa => {
            let question = sample.question.as_deref().unwrap_or_default();
            let options = sample
                .options
                .as_deref()
                .unwrap_or_default()
                .iter()
                .map(|o| format!("{}. {}", o.label, o.text))
                .collect::<Vec<_>>()
                .join(", ");
            let rationale = sample.rationale.as_deref().unwrap_or_default();
            let answer = sample.answer.as_deref().unwrap_or_default();
            Ok(format!(
                "###Question: {question}\n\n###Options: {options}\n\n###Rationale: {rationale}\n\n###Answer: {answer}"
            ))
        }
        crate::types::SampleKind::ShortAnswerQa => Ok(format!(
            "###Question: {}\n\n###Answer: {}",
            sample.question.as_deref().unwrap_or_default(),
            sample.answer.as_deref().unwrap_or_default()
        )),
        crate::types::SampleKind::RawText => Err(Error::validation(format!(
            "sample {}: raw_text records cannot be judged as QA pairs",
            sample.id
        ))),
    }
}

#[derive(Debug)]
pub struct JudgeOutcome {
    pub accepted: Vec<DataSample>,
    pub rejected: Vec<DataSample>,
    pub report: StageReport,
}

/// Judge existing QA samples. The grading context is read from each sample's
/// `context_key` annotation; samples without one are rejected with an error.
pub fn judge_samples(
    samples: Vec<DataSample>,
    cfg: &crate::config::PipelineConfig,
    judges: &[&dyn ChatProvider],
    context_key: &str,
) -> JudgeOutcome {
    let inputs = samples.len();
    let results = crate::util::parallel_map_ordered(samples, cfg.concurrency_limit, |sample| {
        let verdict = judge_one(&sample, judges, &cfg.judge, context_key);
        (sample, verdict)
    });
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut errors = 0usize;
    for (mut sample, outcome) in results {
        match outcome {
            Ok(verdict) => {
                annotate_verdict(&mut sample, "judge", &verdict);
                if verdict.accepted {
                    accepted.push(sample);
                } else {
                    rejected.push(sample);
                }
            }
            Err(err) => {
                errors += 1;
                sample.annotate("judge.error", err.to_string());
                rejected.push(sample);
            }
        }
    }
    let report = StageReport::new("judge", inputs, accepted.len(), rejected.len(), errors);
    JudgeOutcome { accepted, rejected, report }
}

fn judge_one(
    sample: &DataSample,
    judges: &[&dyn ChatProvider],
    cfg: &JudgeConfig,
    context_key: &str,
) -> Result<JudgeVerdict> {
    let context = sample
        .annotations
        .get(context_key)
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            Error::validation(format!(
                "sample {}: missing {context_key:?} annotation holding the grading context",
                sample.id
            ))
        })?
        .to_string();
    let qa_pair = qa_block_text(sample)?;
    judge_pair(&context, &qa_pair, sample.lang, judges, cfg)
}

/// Ten-bin histogram over [0, 1]; out-of-range scores clamp into the edge bins.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: [u64; 10],
}

impl Histogram {
    pub fn record(&mut self, score: f64) {
        let bin = (score * 10.0).floor().clamp(0.0, 9.0) as usize;
        self.bins[bin] += 1;
    }
}

/// Per-stage counters written to `<out>.report.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub inputs: usize,
    pub accepted: usize,
    pub rejected: usize,
    /// Samples that failed with an error (subset of `rejected`).
    pub errors: usize,
    pub acceptance_rate: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub histograms: BTreeMap<String, Histogram>,
}

impl StageReport {
    pub fn new(stage: &str, inputs: usize, accepted: usize, rejected: usize, errors: usize) -> Self {
        let acceptance_rate = if inputs == 0 { 0.0 } else { accepted as f64 / inputs as f64 };
        StageReport {
            stage: stage.to_string(),
            inputs,
            accepted,
            rejected,
            errors,
            acceptance_rate,
            counters: BTreeMap::new(),
            histograms: BTreeMap::new(),
        }
    }
}
