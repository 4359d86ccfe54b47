//! Strict parsers for the structured LLM output formats: condensed text,
//! the two-block MC + short-answer generation, and judge verdict JSON.
//!
//! Marker matching is exact on `###<Name>:` prefixes (case-sensitive); the
//! only lenient fallback is [`parse_condensed`] accepting marker-less prose.
//! Parsers never panic on arbitrary input — every failure is a typed error
//! naming the missing marker or offending value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SEPARATOR: &str = "[SEP]";
const CLEANED_MARKER: &str = "###Cleaned Text:";
const QUESTION_MARKER: &str = "###Question:";
const OPTIONS_MARKER: &str = "###Options:";
const RATIONALE_MARKER: &str = "###Rationale:";
const ANSWER_MARKER: &str = "###Answer:";

pub const OPTION_LABELS: [char; 4] = ['A', 'B', 'C', 'D'];

/// Output of the condense step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensed {
    pub text: String,
    /// True when the `###Cleaned Text:` marker was absent and the whole
    /// response was accepted as prose.
    pub lenient: bool,
}

/// Extract the cleaned text from a condense response.
pub fn parse_condensed(response: &str) -> Result<Condensed> {
    let trimmed = response.trim();
    if trimmed.is_empty() {
        return Err(Error::parse("condense response is empty"));
    }
    match trimmed.find(CLEANED_MARKER) {
        Some(pos) => {
            let text = trimmed[pos + CLEANED_MARKER.len()..].trim();
            if text.is_empty() {
                return Err(Error::parse("condense response has an empty ###Cleaned Text: section"));
            }
            Ok(Condensed { text: text.to_string(), lenient: false })
        }
        None => Ok(Condensed { text: trimmed.to_string(), lenient: true }),
    }
}

/// The parsed multiple-choice block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McQuestion {
    pub question: String,
    /// Exactly four options labelled A–D, in order.
    pub options: Vec<(char, String)>,
    pub rationale: String,
    /// One of A–D.
    pub answer: char,
}

/// The parsed short-answer block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortAnswer {
    pub question: String,
    pub answer: String,
}

/// A full two-question generation: MC first, short answer second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedPair {
    pub mc: McQuestion,
    pub short: ShortAnswer,
}

/// Parse a generation response: two blocks separated by `[SEP]`.
pub fn parse_generated_pair(response: &str) -> Result<GeneratedPair> {
    let segments: Vec<&str> = response.split(SEPARATOR).collect();
    match segments.len() {
        1 => return Err(Error::parse("missing separator [SEP] between the two questions")),
        2 => {}
        n => {
            return Err(Error::parse(format!(
                "expected exactly one [SEP] separator, found {}",
                n - 1
            )))
        }
    }
    let mc = parse_mc_block(segments[0])?;
    let short = parse_short_block(segments[1])?;
    Ok(GeneratedPair { mc, short })
}

/// Slice out the value that follows `marker`, ending at the next marker.
fn field<'a>(block: &'a str, marker: &str, markers: &[&str]) -> Result<&'a str> {
    let start = block
        .find(marker)
        .ok_or_else(|| Error::parse(format!("missing marker {marker}")))?
        + marker.len();
    let rest = &block[start..];
    let end = markers
        .iter()
        .filter_map(|m| rest.find(m))
        .min()
        .unwrap_or(rest.len());
    Ok(rest[..end].trim())
}

fn parse_mc_block(block: &str) -> Result<McQuestion> {
    let markers = [QUESTION_MARKER, OPTIONS_MARKER, RATIONALE_MARKER, ANSWER_MARKER];
    let question = field(block, QUESTION_MARKER, &markers)?;
    let options_text = field(block, OPTIONS_MARKER, &markers)?;
    let rationale = field(block, RATIONALE_MARKER, &markers)?;
    let answer_text = field(block, ANSWER_MARKER, &markers)?;
    if question.is_empty() {
        return Err(Error::parse("multiple-choice question text is empty"));
    }
    let options = parse_options(options_text)?;
    let answer = normalize_answer(answer_text, &options)?;
    Ok(McQuestion {
        question: question.to_string(),
        options,
        rationale: rationale.to_string(),
        answer,
    })
}

fn parse_short_block(block: &str) -> Result<ShortAnswer> {
    let markers = [QUESTION_MARKER, ANSWER_MARKER];
    let question = field(block, QUESTION_MARKER, &markers)?;
    let answer = field(block, ANSWER_MARKER, &markers)?;
    if question.is_empty() {
        return Err(Error::parse("short-answer question text is empty"));
    }
    if answer.is_empty() {
        return Err(Error::parse("short answer text is empty"));
    }
    Ok(ShortAnswer { question: question.to_string(), answer: answer.to_string() })
}

/// Split `A. optionA, B. optionB, C. optionC, D. optionD` on the label
/// pattern. Labels must appear in order; commas inside option text are
/// preserved, with a single trailing list separator stripped per option.
fn parse_options(text: &str) -> Result<Vec<(char, String)>> {
    let mut starts = Vec::with_capacity(OPTION_LABELS.len());
    let mut cursor = 0usize;
    for label in OPTION_LABELS {
        let pos = find_label(text, label, cursor).ok_or_else(|| {
            Error::parse(format!("options list is missing label {label}."))
        })?;
        starts.push(pos);
        cursor = pos + 2;
    }
    let mut options = Vec::with_capacity(OPTION_LABELS.len());
    for (idx, label) in OPTION_LABELS.iter().enumerate() {
        let value_start = starts[idx] + 2;
        let value_end = if idx + 1 < starts.len() { starts[idx + 1] } else { text.len() };
        let raw = text[value_start..value_end].trim();
        let value = strip_trailing_separator(raw);
        if value.is_empty() {
            return Err(Error::parse(format!("option {label} has empty text")));
        }
        options.push((*label, value.to_string()));
    }
    Ok(options)
}

/// Find `"<label>."` at or after `from`, requiring a token boundary before
/// the label so option text like "vitamin D. deficiency" is less likely to
/// split spuriously.
fn find_label(text: &str, label: char, from: usize) -> Option<usize> {
    let needle = [label, '.'];
    let needle: String = needle.iter().collect();
    let mut search_from = from;
    while let Some(rel) = text[search_from..].find(&needle) {
        let pos = search_from + rel;
        let boundary = text[..pos]
            .chars()
            .next_back()
            .map(|c| c.is_whitespace() || c == ',' || c == '，' || c == '、' || c == ';')
            .unwrap_or(true);
        if boundary {
            return Some(pos);
        }
        search_from = pos + 1;
    }
    None
}

fn strip_trailing_separator(s: &str) -> &str {
    let trimmed = s.trim_end();
    trimmed
        .strip_suffix([',', '，', '、', ';'])
        .map(str::trim_end)
        .unwrap_or(trimmed)
}

/// Normalize an answer given as `B`, `B.`, `(B)`, `B. optionB`, or the full
/// option text to its label.
fn normalize_answer(text: &str, options: &[(char, String)]) -> Result<char> {
    let cleaned = text.trim().trim_matches(|c| c == '(' || c == ')' || c == '\'' || c == '"');
    if cleaned.is_empty() {
        return Err(Error::parse("answer field is empty"));
    }
    let mut chars = cleaned.chars();
    let first = chars.next().unwrap();
    let next = chars.next();
    let looks_like_label =
        next.is_none() || matches!(next, Some('.') | Some(')') | Some(':')) || next.is_some_and(char::is_whitespace);
    if looks_like_label {
        if OPTION_LABELS.contains(&first) {
            return Ok(first);
        }
        return Err(Error::validation(format!(
            "answer index {first:?} is outside A–D"
        )));
    }
    if let Some((label, _)) = options.iter().find(|(_, opt)| opt == cleaned) {
        return Ok(*label);
    }
    Err(Error::validation(format!(
        "answer {cleaned:?} is neither a label in A–D nor a full option text"
    )))
}

/// Scores returned by a judge on the three criteria, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JudgeScores {
    pub logically_consistent: f64,
    pub factually_accurate: f64,
    pub sound_reasoning: f64,
}

impl JudgeScores {
    pub const ZERO: JudgeScores = JudgeScores {
        logically_consistent: 0.0,
        factually_accurate: 0.0,
        sound_reasoning: 0.0,
    };

    pub fn as_array(&self) -> [f64; 3] {
        [self.logically_consistent, self.factually_accurate, self.sound_reasoning]
    }

    pub const CRITERIA: [&'static str; 3] =
        ["logically_consistent", "factually_accurate", "sound_reasoning"];
}

/// Parse a judge response: the first JSON object in the text, tolerating
/// surrounding prose, code fences, and the single-quoted pseudo-JSON of the
/// judge prompt's own example.
pub fn parse_judge(response: &str) -> Result<JudgeScores> {
    let object = extract_first_object(response)
        .ok_or_else(|| Error::parse("no JSON object found in judge response"))?;
    let value: serde_json::Value = match serde_json::from_str(object) {
        Ok(v) => v,
        Err(_) => {
            let normalized = normalize_single_quotes(object);
            serde_json::from_str(&normalized)
                .map_err(|e| Error::parse(format!("judge response is not valid JSON: {e}")))?
        }
    };
    let map = value
        .as_object()
        .ok_or_else(|| Error::parse("judge response is not a JSON object"))?;
    let score = |spaced: &str, underscored: &str| -> Result<f64> {
        let raw = map
            .get(spaced)
            .or_else(|| map.get(underscored))
            .ok_or_else(|| Error::parse(format!("judge response is missing key {spaced:?}")))?;
        let number = raw
            .as_f64()
            .ok_or_else(|| Error::parse(format!("judge key {spaced:?} is not a number")))?;
        if !(0.0..=1.0).contains(&number) {
            return Err(Error::validation(format!(
                "judge score for {spaced:?} must lie in [0, 1], got {number}"
            )));
        }
        Ok(number)
    };
    Ok(JudgeScores {
        logically_consistent: score("logically consistent", "logically_consistent")?,
        factually_accurate: score("factually accurate", "factually_accurate")?,
        sound_reasoning: score("sound reasoning", "sound_reasoning")?,
    })
}

/// Locate the first balanced `{...}` span, tracking strings so braces inside
/// quoted values do not confuse the scan.
fn extract_first_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let start = text.find('{')?;
    let mut depth = 0usize;
    let mut in_string: Option<u8> = None;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if let Some(quote) = in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == quote {
                in_string = None;
            }
            continue;
        }
        match b {
            b'"' | b'\'' => in_string = Some(b),
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + offset + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Convert single-quoted keys/values to double quotes. Apostrophes inside
/// double-quoted strings survive untouched.
fn normalize_single_quotes(object: &str) -> String {
    let mut out = String::with_capacity(object.len());
    let mut in_double = false;
    let mut in_single = false;
    let mut escaped = false;
    for c in object.chars() {
        if escaped {
            out.push(c);
            escaped = false;
            continue;
        }
        match c {
            '\\' => {
                out.push(c);
                escaped = true;
            }
            '"' if !in_single => {
                in_double = !in_double;
                out.push(c);
            }
            '\'' if !in_double => {
                in_single = !in_single;
                out.push('"');
            }
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const WELL_FORMED: &str = "###Question: Which hormone lowers blood glucose?\n\n\
###Options: A. Glucagon, B. Insulin, C. Cortisol, D. Adrenaline\n\n\
###Rationale: Insulin promotes cellular glucose uptake.\n\n\
###Answer: B\n[SEP]\n\
###Question: What organ secretes insulin?\n\n\
###Answer: The pancreas, specifically its beta cells.";

    #[test]
    fn condensed_marker_is_extracted() {
        let parsed = parse_condensed("###Cleaned Text: abc").unwrap();
        assert_eq!(parsed.text, "abc");
        assert!(!parsed.lenient);
    }

    #[test]
    fn condensed_falls_back_to_whole_prose() {
        let parsed = parse_condensed("abc").unwrap();
        assert_eq!(parsed.text, "abc");
        assert!(parsed.lenient);
    }

    #[test]
    fn condensed_rejects_empty() {
        assert!(parse_condensed("").is_err());
        assert!(parse_condensed("  \n ").is_err());
    }

    #[test]
    fn well_formed_pair_parses() {
        let pair = parse_generated_pair(WELL_FORMED).unwrap();
        assert_eq!(pair.mc.answer, 'B');
        assert_eq!(pair.mc.options.len(), 4);
        assert_eq!(pair.mc.options[1], ('B', "Insulin".to_string()));
        assert_eq!(pair.mc.question, "Which hormone lowers blood glucose?");
        assert_eq!(pair.short.question, "What organ secretes insulin?");
        assert!(pair.short.answer.starts_with("The pancreas"));
    }

    #[test]
    fn missing_separator_is_reported() {
        let err = parse_generated_pair("###Question: q").unwrap_err();
        assert!(err.to_string().contains("[SEP]"));
    }

    #[test]
    fn missing_answer_marker_is_named() {
        let block = WELL_FORMED.replace("###Answer: B\n", "");
        let err = parse_generated_pair(&block).unwrap_err();
        assert!(err.to_string().contains("###Answer:"));
    }

    #[test]
    fn answer_outside_labels_is_a_validation_error() {
        let block = WELL_FORMED.replace("###Answer: B\n", "###Answer: E\n");
        let err = parse_generated_pair(&block).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn full_text_answers_normalize_to_label() {
        let block = WELL_FORMED.replace("###Answer: B\n", "###Answer: B. Insulin\n");
        assert_eq!(parse_generated_pair(&block).unwrap().mc.answer, 'B');
        let block = WELL_FORMED.replace("###Answer: B\n", "###Answer: Insulin\n");
        assert_eq!(parse_generated_pair(&block).unwrap().mc.answer, 'B');
    }

    #[test]
    fn commas_inside_option_text_are_preserved() {
        let text = "A. fever, chills, and cough, B. rash, C. fatigue, D. nausea";
        let options = parse_options(text).unwrap();
        assert_eq!(options[0].1, "fever, chills, and cough");
        assert_eq!(options[3].1, "nausea");
    }

    #[test]
    fn cjk_option_text_parses() {
        let response = "###Question: 胰岛素由哪个器官分泌？\n\n\
###Options: A. 肝脏, B. 胰腺, C. 肾脏, D. 心脏\n\n\
###Rationale: 胰腺β细胞分泌胰岛素。\n\n\
###Answer: B\n[SEP]\n###Question: 什么是糖尿病？\n\n###Answer: 一种以高血糖为特征的代谢疾病。";
        let pair = parse_generated_pair(response).unwrap();
        assert_eq!(pair.mc.options[1].1, "胰腺");
    }

    #[test]
    fn judge_example_parses_to_exact_values() {
        let response =
            "{'logically consistent':0.9, 'factually accurate':0.85, 'sound reasoning':1.0}";
        let scores = parse_judge(response).unwrap();
        assert_eq!(scores.logically_consistent, 0.9);
        assert_eq!(scores.factually_accurate, 0.85);
        assert_eq!(scores.sound_reasoning, 1.0);
    }

    #[test]
    fn judge_object_inside_code_fence_parses_identically() {
        let response = "Here is my evaluation:\n```json\n{\"logically consistent\": 0.9, \
            \"factually accurate\": 0.85, \"sound reasoning\": 1.0}\n```\nDone.";
        let scores = parse_judge(response).unwrap();
        assert_eq!(scores.logically_consistent, 0.9);
        assert_eq!(scores.factually_accurate, 0.85);
    }

    #[test]
    fn judge_accepts_underscore_keys() {
        let scores =
            parse_judge(r#"{"logically_consistent":1,"factually_accurate":0.5,"sound_reasoning":0}"#)
                .unwrap();
        assert_eq!(scores.as_array(), [1.0, 0.5, 0.0]);
    }

    #[test]
    fn judge_score_out_of_range_is_a_validation_error() {
        let err = parse_judge("{'logically consistent':1.3, 'factually accurate':0.85, 'sound reasoning':1.0}")
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn judge_missing_key_is_a_parse_error() {
        let err = parse_judge("{'logically consistent':0.9}").unwrap_err();
        assert!(err.to_string().contains("factually accurate"));
    }

    #[test]
    fn judge_without_object_is_a_parse_error() {
        assert!(parse_judge("no json here").is_err());
    }

    #[test]
    fn apostrophes_inside_double_quotes_survive() {
        let response = r#"{"logically consistent":0.9, "factually accurate":0.8, "sound reasoning":0.7, "note":"it's fine"}"#;
        let scores = parse_judge(response).unwrap();
        assert_eq!(scores.sound_reasoning, 0.7);
    }
}
