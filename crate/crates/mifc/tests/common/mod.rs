//! Shared test support: fixture paths and the deterministic mock providers
//! that stand in for the generator, judges, and translator. The mocks are
//! pure functions of the prompt (plus one counter for the re-prompt case), so
//! recorded replay files and mock-backed runs agree byte for byte.
//!
//! Behavior markers planted in fixture texts:
//! - "arrhythmia": the generator's first QA response is malformed (re-prompt)
//! - "homeopathy": judges score factual accuracy 0.4 (pair rejected)
//! - "dermatitis": the condense response omits its marker (lenient parse)
//! - "placebo":    back-translation comes back scrambled (gate rejects)

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::Mutex;

use mifc::config::PipelineConfig;
use mifc::error::Error;
use mifc::llm::testing::FnProvider;

pub fn fixture_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(relative)
}

pub fn fixture_config() -> PipelineConfig {
    PipelineConfig::load(fixture_path("config.json")).expect("fixture config parses")
}

fn after<'a>(prompt: &'a str, marker: &str) -> &'a str {
    prompt.rsplit_once(marker).map(|(_, rest)| rest).unwrap_or_default().trim()
}

fn first_sentence(text: &str) -> &str {
    match text.find('.') {
        Some(pos) => &text[..=pos],
        None => text,
    }
}

fn topic_word(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .find(|w| w.chars().count() >= 8)
        .unwrap_or("medicine")
        .to_lowercase()
}

/// Deterministic generator covering the condense, QA-generation, expansion,
/// and translation prompts under one model label.
pub fn mock_generator(label: &str) -> FnProvider {
    let reprompted: Mutex<HashSet<String>> = Mutex::new(HashSet::new());
    FnProvider::new(label, move |prompt| {
        if prompt.contains("clean the texts") {
            let input = after(prompt, "User Input: ###Input: ");
            if input.contains("dermatitis") {
                return Ok(input.to_string());
            }
            return Ok(format!("###Cleaned Text: {input}"));
        }
        if prompt.contains("creating medical questions") {
            let condensed = after(prompt, "User Input: ###Input: ");
            if condensed.contains("arrhythmia") {
                let mut seen = reprompted.lock().unwrap();
                if seen.insert(prompt.to_string()) {
                    return Ok("The article describes cardiac rhythm problems.".to_string());
                }
            }
            let topic = topic_word(condensed);
            let fact = first_sentence(condensed);
            let claim = fact.trim_end_matches('.');
            return Ok(format!(
                "###Question: According to the article, which statement about {topic} is correct?\n\n\
###Options: A. The article says {topic} is unrelated to patient care, B. {claim}, \
C. The article never mentions {topic}, D. The article recommends ignoring {topic} entirely\n\n\
###Rationale: The article states: {fact}\n\n\
###Answer: B\n\
[SEP]\n\
###Question: What does the article conclude about {topic}?\n\n\
###Answer: {fact}"
            ));
        }
        if prompt.contains("answering general medical questions") {
            let keywords = after(prompt, "###Answer Keywords: ");
            return Ok(format!(
                "基于关键词（{keywords}），可以给出完整的回答：上述要点共同构成该问题的核心内容，应结合临床情况综合考虑。"
            ));
        }
        if prompt.contains("professional medical translator") {
            // Forward: "KO|" + reversed text (reversible, and character
            // 5-grams shared with the source are negligible, as with a real
            // script change). Back: undo, unless the text is marked lossy.
            let input = after(prompt, "User Input: ###Input: ");
            return Ok(match input.strip_prefix("KO|") {
                Some(stripped) => {
                    let restored: String = stripped.chars().rev().collect();
                    if restored.contains("placebo") {
                        "completely different clinical study text that shares nothing with the source"
                            .to_string()
                    } else {
                        restored
                    }
                }
                None => format!("KO|{}", input.chars().rev().collect::<String>()),
            });
        }
        Err(Error::transport(format!(
            "mock generator got an unexpected prompt: {}",
            prompt.chars().take(80).collect::<String>()
        )))
    })
}

/// Judge mock. `fenced` wraps the verdict in prose and a code fence, which
/// the parser must tolerate.
pub fn mock_judge(label: &str, fenced: bool) -> FnProvider {
    FnProvider::new(label, move |prompt| {
        if !prompt.contains("medical school professor") {
            return Err(Error::transport("mock judge got a non-judge prompt"));
        }
        if prompt.contains("homeopathy") {
            return Ok(
                "{'logically consistent':0.8, 'factually accurate':0.4, 'sound reasoning':0.7}"
                    .to_string(),
            );
        }
        if fenced {
            Ok("Here is my evaluation:\n```json\n{\"logically consistent\": 1.0, \
\"factually accurate\": 1.0, \"sound reasoning\": 0.9}\n```"
                .to_string())
        } else {
            Ok(
                "{'logically consistent':0.95, 'factually accurate':0.9, 'sound reasoning':1.0}"
                    .to_string(),
            )
        }
    })
}
