//! Two-step QA generation over raw corpus text: condense, generate a
//! multiple-choice + short-answer pair, then gate on the judges' verdict.

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::llm::prompts::{PromptId, PromptTemplate};
use crate::llm::ChatProvider;
use crate::parsing::{parse_condensed, parse_generated_pair, Condensed, GeneratedPair};
use crate::types::{DataSample, McOption, SampleKind};
use crate::util::parallel_map_ordered;

use super::{annotate_verdict, judge_pair, JudgeVerdict, StageReport};

#[derive(Debug)]
pub struct GenQaOutcome {
    /// Two samples per accepted pair: the MC question (with rationale) and
    /// the short-answer question, in input order.
    pub accepted: Vec<DataSample>,
    /// Source samples that errored or whose pair failed the judge gate,
    /// annotated with the reason.
    pub rejected: Vec<DataSample>,
    pub report: StageReport,
}

struct PairResult {
    condensed: Condensed,
    pair: GeneratedPair,
    verdict: JudgeVerdict,
}

/// Run the generation flow over raw-text samples.
pub fn generate_qa(
    raw: Vec<DataSample>,
    cfg: &PipelineConfig,
    generator: &dyn ChatProvider,
    judges: &[&dyn ChatProvider],
) -> GenQaOutcome {
    let inputs = raw.len();
    let results = parallel_map_ordered(raw, cfg.concurrency_limit, |sample| {
        let outcome = generate_one(&sample, cfg, generator, judges);
        (sample, outcome)
    });

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    let mut errors = 0usize;
    let mut pairs_accepted = 0usize;
    let mut pairs_rejected = 0usize;
    for (mut source, outcome) in results {
        match outcome {
            Ok(result) if result.verdict.accepted => {
                pairs_accepted += 1;
                accepted.extend(emit_pair(&source, &result));
            }
            Ok(result) => {
                pairs_rejected += 1;
                annotate_verdict(&mut source, "gen.judge", &result.verdict);
                source.annotate("gen.rejected_reason", "judge_below_threshold");
                rejected.push(source);
            }
            Err(err) => {
                errors += 1;
                source.annotate("gen.error", err.to_string());
                rejected.push(source);
            }
        }
    }

    let mut report =
        StageReport::new("genqa", inputs, pairs_accepted, pairs_rejected + errors, errors);
    report.counters.insert("pairs_accepted".into(), pairs_accepted as u64);
    report.counters.insert("pairs_rejected".into(), pairs_rejected as u64);
    report.counters.insert("samples_emitted".into(), accepted.len() as u64);
    GenQaOutcome { accepted, rejected, report }
}

fn generate_one(
    sample: &DataSample,
    cfg: &PipelineConfig,
    generator: &dyn ChatProvider,
    judges: &[&dyn ChatProvider],
) -> Result<PairResult> {
    if sample.kind != SampleKind::RawText {
        return Err(Error::validation(format!(
            "sample {}: genqa requires kind raw_text",
            sample.id
        )));
    }
    let text = sample.raw_text.as_deref().unwrap_or_default();
    let lang = sample.lang.english_name();
    let temperature = cfg.provider.temperature;

    let condense_prompt = PromptTemplate::get(PromptId::Condense)
        .render(&[("LANG", lang), ("original_text", text)])?;
    let condensed = complete_with_one_reprompt(generator, &condense_prompt, temperature, |response| {
        parse_condensed(response)
    })?;

    let gen_prompt = PromptTemplate::get(PromptId::GenQa)
        .render(&[("LANG", lang), ("condensed_text", &condensed.text)])?;
    let (generation, pair) =
        complete_with_one_reprompt(generator, &gen_prompt, temperature, |response| {
            parse_generated_pair(response).map(|pair| (response.to_string(), pair))
        })?;

    let verdict = judge_pair(&condensed.text, &generation, sample.lang, judges, &cfg.judge)?;
    Ok(PairResult { condensed, pair, verdict })
}

/// Ask once; on a format violation ask once more with the identical prompt,
/// then give up. Transport errors are not re-prompted here (the client
/// already retries transient failures).
fn complete_with_one_reprompt<T>(
    provider: &dyn ChatProvider,
    prompt: &str,
    temperature: f64,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<T> {
    let first = provider.complete(prompt, temperature)?;
    match parse(&first.response) {
        Ok(value) => Ok(value),
        Err(first_err) => {
            let second = provider.complete(prompt, temperature)?;
            parse(&second.response).map_err(|second_err| {
                Error::parse(format!(
                    "format violation after re-prompt: {second_err} (first attempt: {first_err})"
                ))
            })
        }
    }
}

fn emit_pair(source: &DataSample, result: &PairResult) -> Vec<DataSample> {
    let mc = &result.pair.mc;
    let mut mc_sample = DataSample::multiple_choice(
        format!("{}.mc", source.id),
        source.lang,
        mc.question.clone(),
        mc.options
            .iter()
            .map(|(label, text)| McOption::new(label.to_string(), text.clone()))
            .collect(),
        mc.answer.to_string(),
        source.source.clone(),
    );
    mc_sample.rationale = Some(mc.rationale.clone());

    let short = &result.pair.short;
    let mut short_sample = DataSample::short_answer(
        format!("{}.sa", source.id),
        source.lang,
        short.question.clone(),
        short.answer.clone(),
        source.source.clone(),
    );

    for sample in [&mut mc_sample, &mut short_sample] {
        sample.annotate("gen.source_id", source.id.clone());
        if result.condensed.lenient {
            sample.annotate("gen.condense_lenient", true);
        }
        annotate_verdict(sample, "gen.judge", &result.verdict);
    }
    vec![mc_sample, short_sample]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::testing::FnProvider;
    use crate::types::LanguageTag;
    use std::sync::atomic::{AtomicUsize, Ordering};

    const GOOD_GENERATION: &str = "###Question: Which hormone lowers blood glucose?\n\n\
###Options: A. Glucagon, B. Insulin, C. Cortisol, D. Adrenaline\n\n\
###Rationale: Insulin promotes glucose uptake.\n\n\
###Answer: B\n[SEP]\n\
###Question: What organ secretes insulin?\n\n###Answer: The pancreas.";

    fn generator() -> FnProvider {
        FnProvider::new("gen", |prompt| {
            if prompt.contains("clean the texts") {
                Ok("###Cleaned Text: Insulin lowers blood glucose.".into())
            } else {
                Ok(GOOD_GENERATION.into())
            }
        })
    }

    fn perfect_judge(label: &str) -> FnProvider {
        FnProvider::new(label, |_| {
            Ok("{'logically consistent':1.0, 'factually accurate':1.0, 'sound reasoning':1.0}".into())
        })
    }

    fn raw(id: &str) -> DataSample {
        DataSample::raw(id, LanguageTag::En, "Insulin, made by the pancreas, lowers glucose.", "mmedc")
    }

    #[test]
    fn accepted_pair_emits_two_samples() {
        let cfg = PipelineConfig::default();
        let generator = generator();
        let j1 = perfect_judge("j1");
        let j2 = perfect_judge("j2");
        let outcome = generate_qa(vec![raw("r1")], &cfg, &generator, &[&j1, &j2]);
        assert_eq!(outcome.accepted.len(), 2);
        assert_eq!(outcome.rejected.len(), 0);

        let mc = &outcome.accepted[0];
        assert_eq!(mc.id, "r1.mc");
        assert_eq!(mc.kind, SampleKind::MultipleChoiceQa);
        assert_eq!(mc.answer.as_deref(), Some("B"));
        assert_eq!(mc.options.as_ref().unwrap().len(), 4);
        assert!(mc.rationale.is_some());
        assert_eq!(mc.annotations["gen.judge.accepted"].as_bool(), Some(true));
        assert_eq!(mc.annotations["gen.source_id"].as_str(), Some("r1"));

        let short = &outcome.accepted[1];
        assert_eq!(short.id, "r1.sa");
        assert_eq!(short.kind, SampleKind::ShortAnswerQa);
        short.validate().unwrap();
    }

    #[test]
    fn low_judge_score_rejects_the_pair() {
        let cfg = PipelineConfig::default();
        let generator = generator();
        let weak = FnProvider::new("weak", |_| {
            Ok("{'logically consistent':1.0, 'factually accurate':0.4, 'sound reasoning':1.0}".into())
        });
        let outcome = generate_qa(vec![raw("r1")], &cfg, &generator, &[&weak]);
        assert!(outcome.accepted.is_empty());
        assert_eq!(outcome.rejected.len(), 1);
        let rejected = &outcome.rejected[0];
        assert_eq!(
            rejected.annotations["gen.rejected_reason"].as_str(),
            Some("judge_below_threshold")
        );
        assert_eq!(rejected.annotations["gen.judge.factually_accurate"].as_f64(), Some(0.4));
    }

    #[test]
    fn format_violation_gets_one_reprompt() {
        let calls = AtomicUsize::new(0);
        let generator = FnProvider::new("gen", move |prompt| {
            if prompt.contains("clean the texts") {
                return Ok("###Cleaned Text: ctx".into());
            }
            if calls.fetch_add(1, Ordering::SeqCst) == 0 {
                Ok("malformed output, no separator".into())
            } else {
                Ok(GOOD_GENERATION.into())
            }
        });
        let j = perfect_judge("j");
        let cfg = PipelineConfig::default();
        let outcome = generate_qa(vec![raw("r1")], &cfg, &generator, &[&j]);
        assert_eq!(outcome.accepted.len(), 2);
    }

    #[test]
    fn persistent_format_violation_rejects_with_reason() {
        let generator = FnProvider::new("gen", |prompt| {
            if prompt.contains("clean the texts") {
                Ok("###Cleaned Text: ctx".into())
            } else {
                Ok("still malformed".into())
            }
        });
        let j = perfect_judge("j");
        let cfg = PipelineConfig::default();
        let outcome = generate_qa(vec![raw("r1")], &cfg, &generator, &[&j]);
        assert!(outcome.accepted.is_empty());
        let rejected = &outcome.rejected[0];
        let reason = rejected.annotations["gen.error"].as_str().unwrap();
        assert!(reason.contains("re-prompt"));
        assert_eq!(outcome.report.errors, 1);
    }

    #[test]
    fn lenient_condense_is_flagged() {
        let generator = FnProvider::new("gen", |prompt| {
            if prompt.contains("clean the texts") {
                Ok("prose without marker".into())
            } else {
                Ok(GOOD_GENERATION.into())
            }
        });
        let j = perfect_judge("j");
        let cfg = PipelineConfig::default();
        let outcome = generate_qa(vec![raw("r1")], &cfg, &generator, &[&j]);
        assert_eq!(outcome.accepted[0].annotations["gen.condense_lenient"].as_bool(), Some(true));
    }

    #[test]
    fn conservation_over_mixed_outcomes() {
        let generator = FnProvider::new("gen", |prompt| {
            if prompt.contains("clean the texts") {
                if prompt.contains("transport-fail") {
                    return Err(Error::transport("mock outage"));
                }
                Ok("###Cleaned Text: ctx".into())
            } else {
                Ok(GOOD_GENERATION.into())
            }
        });
        let j = perfect_judge("j");
        let cfg = PipelineConfig::default();
        let samples = vec![
            raw("a"),
            DataSample::raw("b", LanguageTag::En, "transport-fail text", "s"),
            raw("c"),
        ];
        let outcome = generate_qa(samples, &cfg, &generator, &[&j]);
        assert_eq!(outcome.report.inputs, 3);
        assert_eq!(outcome.report.accepted + outcome.report.rejected, 3);
        assert_eq!(outcome.accepted.len(), 4);
        assert_eq!(outcome.rejected.len(), 1);
        assert_eq!(outcome.rejected[0].id, "b");
    }
}
