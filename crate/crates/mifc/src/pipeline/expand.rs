//! Answer expanding: turn keyword-style short answers into complete prose.

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::llm::prompts::{PromptId, PromptTemplate};
use crate::llm::ChatProvider;
use crate::types::{DataSample, SampleKind};
use crate::util::parallel_map_ordered;

use super::StageReport;

#[derive(Debug)]
pub struct ExpandOutcome {
    pub expanded: Vec<DataSample>,
    pub failures: Vec<DataSample>,
    pub report: StageReport,
}

/// Replace each short answer with its LLM expansion. The original answer is
/// preserved under the `expand.original` annotation; samples that cannot be
/// expanded go to `failures` with an `expand.error` annotation.
pub fn expand_answers(
    samples: Vec<DataSample>,
    cfg: &PipelineConfig,
    provider: &dyn ChatProvider,
) -> ExpandOutcome {
    let inputs = samples.len();
    let temperature = cfg.provider.temperature;
    let results = parallel_map_ordered(samples, cfg.concurrency_limit, |sample| {
        let outcome = expand_one(&sample, provider, temperature);
        (sample, outcome)
    });

    let mut expanded = Vec::new();
    let mut failures = Vec::new();
    for (mut sample, outcome) in results {
        match outcome {
            Ok(expansion) => {
                let original = sample.answer.take().unwrap_or_default();
                sample.annotate("expand.original", original);
                sample.answer = Some(expansion);
                expanded.push(sample);
            }
            Err(err) => {
                sample.annotate("expand.error", err.to_string());
                failures.push(sample);
            }
        }
    }
    let errors = failures.len();
    let report = StageReport::new("expand", inputs, expanded.len(), failures.len(), errors);
    ExpandOutcome { expanded, failures, report }
}

fn expand_one(sample: &DataSample, provider: &dyn ChatProvider, temperature: f64) -> Result<String> {
    if sample.kind != SampleKind::ShortAnswerQa {
        return Err(Error::validation(format!(
            "sample {}: expand requires kind short_answer_qa",
            sample.id
        )));
    }
    let question = sample.question.as_deref().unwrap_or_default();
    let keywords = sample.answer.as_deref().unwrap_or_default().trim();
    if keywords.is_empty() {
        return Err(Error::validation(format!(
            "sample {}: expand requires a non-empty keyword answer",
            sample.id
        )));
    }
    let prompt = PromptTemplate::get(PromptId::ExpandAnswer).render(&[
        ("LANG", sample.lang.english_name()),
        ("question", question),
        ("answer_keywords", keywords),
    ])?;
    let exchange = provider.complete(&prompt, temperature)?;
    let expansion = exchange.response.trim();
    if expansion.is_empty() {
        return Err(Error::parse(format!("sample {}: empty expansion response", sample.id)));
    }
    Ok(expansion.to_string())
}
