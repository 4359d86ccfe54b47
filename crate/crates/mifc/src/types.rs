//! Domain types and the canonical JSONL record schema shared by every stage.
//!
//! A corpus is a JSONL file, one [`DataSample`] per line. Field names are part
//! of the on-disk contract (see the README schema table). Unknown top-level
//! fields survive a parse/serialize round trip so files produced by newer
//! tools remain intact.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six supported corpus languages.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum LanguageTag {
    #[serde(rename = "EN")]
    En,
    #[serde(rename = "ZH")]
    Zh,
    #[serde(rename = "JA")]
    Ja,
    #[serde(rename = "KO")]
    Ko,
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "ES")]
    Es,
}

impl LanguageTag {
    pub const ALL: [LanguageTag; 6] = [
        LanguageTag::En,
        LanguageTag::Zh,
        LanguageTag::Ja,
        LanguageTag::Ko,
        LanguageTag::Fr,
        LanguageTag::Es,
    ];

    /// Two-letter uppercase code used in files and CLI flags.
    pub fn code(&self) -> &'static str {
        match self {
            LanguageTag::En => "EN",
            LanguageTag::Zh => "ZH",
            LanguageTag::Ja => "JA",
            LanguageTag::Ko => "KO",
            LanguageTag::Fr => "FR",
            LanguageTag::Es => "ES",
        }
    }

    /// English-language name, used to bind the `{LANG}` prompt placeholder.
    pub fn english_name(&self) -> &'static str {
        match self {
            LanguageTag::En => "English",
            LanguageTag::Zh => "Chinese",
            LanguageTag::Ja => "Japanese",
            LanguageTag::Ko => "Korean",
            LanguageTag::Fr => "French",
            LanguageTag::Es => "Spanish",
        }
    }

    /// Whether whitespace tokenization is meaningful for this language.
    /// ZH/JA/KO text is matched and tokenized per character by default.
    pub fn is_space_delimited(&self) -> bool {
        matches!(self, LanguageTag::En | LanguageTag::Fr | LanguageTag::Es)
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EN" => Ok(LanguageTag::En),
            "ZH" => Ok(LanguageTag::Zh),
            "JA" => Ok(LanguageTag::Ja),
            "KO" => Ok(LanguageTag::Ko),
            "FR" => Ok(LanguageTag::Fr),
            "ES" => Ok(LanguageTag::Es),
            other => Err(Error::validation(format!(
                "unknown language tag {other:?} (expected one of EN, ZH, JA, KO, FR, ES)"
            ))),
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// What a [`DataSample`] holds: raw corpus text or one of the two QA shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    RawText,
    ShortAnswerQa,
    MultipleChoiceQa,
}

/// One labelled choice of a multiple-choice question.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McOption {
    pub label: String,
    pub text: String,
}

impl McOption {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        McOption { label: label.into(), text: text.into() }
    }
}

/// A scalar annotation value. Pipeline stages write flat string-keyed scalar
/// annotations; nested metric payloads use dotted keys (`ccts.bleu_mean`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<bool> for Scalar {
    fn from(v: bool) -> Self {
        Scalar::Bool(v)
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::Int(v)
    }
}

impl From<usize> for Scalar {
    fn from(v: usize) -> Self {
        Scalar::Int(v as i64)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Float(v)
    }
}

impl From<&str> for Scalar {
    fn from(v: &str) -> Self {
        Scalar::Text(v.to_string())
    }
}

impl From<String> for Scalar {
    fn from(v: String) -> Self {
        Scalar::Text(v)
    }
}

impl Scalar {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Float(v) => Some(*v),
            Scalar::Int(v) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Text(v) => Some(v),
            _ => None,
        }
    }
}

/// One corpus record.
///
/// Invariants (enforced by [`DataSample::validate`], checked on parse):
/// - `raw_text` kind: `raw_text` present, `question`/`options` absent
/// - `multiple_choice_qa`: `question`, ≥2 uniquely-labelled `options`, and an
///   `answer` matching one option label
/// - `short_answer_qa`: `question` and `answer` present, `options` absent
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSample {
    pub id: String,
    pub lang: LanguageTag,
    pub kind: SampleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<McOption>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    /// Dataset-of-origin identifier.
    pub source: String,
    /// Stage-written audit trail. Writes are additive: no stage removes
    /// another stage's keys.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub annotations: BTreeMap<String, Scalar>,
    /// Unknown top-level fields, preserved verbatim on round trip.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl DataSample {
    /// Minimal raw-text record.
    pub fn raw(
        id: impl Into<String>,
        lang: LanguageTag,
        text: impl Into<String>,
        source: impl Into<String>,
    ) -> Self {
        DataSample {
            id: id.into(),
            lang,
            kind: SampleKind::RawText,
            question: None,
            options: None,
            rationale: None,
            answer: None,
            raw_text: Some(text.into()),
            source: source.into(),
            annotations: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Minimal short-answer record.
    pub fn short_answer(
        id: impl Into<String>,
        lang: LanguageTag,
        question: impl Into<String>,
        answer: impl Into<String>,
        source: impl Into<String>,
    ) -> Self {
        DataSample {
            id: id.into(),
            lang,
            kind: SampleKind::ShortAnswerQa,
            question: Some(question.into()),
            options: None,
            rationale: None,
            answer: Some(answer.into()),
            raw_text: None,
            source: source.into(),
            annotations: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Minimal multiple-choice record.
    pub fn multiple_choice(
        id: impl Into<String>,
        lang: LanguageTag,
        question: impl Into<String>,
        options: Vec<McOption>,
        answer: impl Into<String>,
        source: impl Into<String>,
    ) -> Self {
        DataSample {
            id: id.into(),
            lang,
            kind: SampleKind::MultipleChoiceQa,
            question: Some(question.into()),
            options: Some(options),
            rationale: None,
            answer: Some(answer.into()),
            raw_text: None,
            source: source.into(),
            annotations: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::validation("sample field `id` must be non-empty"));
        }
        match self.kind {
            SampleKind::RawText => {
                if self.raw_text.is_none() {
                    return Err(Error::validation(format!(
                        "sample {}: kind raw_text requires field `raw_text`",
                        self.id
                    )));
                }
                if self.question.is_some() || self.options.is_some() {
                    return Err(Error::validation(format!(
                        "sample {}: kind raw_text forbids `question` and `options`",
                        self.id
                    )));
                }
            }
            SampleKind::MultipleChoiceQa => {
                if self.question.is_none() {
                    return Err(Error::validation(format!(
                        "sample {}: kind multiple_choice_qa requires `question`",
                        self.id
                    )));
                }
                let options = self.options.as_ref().ok_or_else(|| {
                    Error::validation(format!(
                        "sample {}: kind multiple_choice_qa requires `options`",
                        self.id
                    ))
                })?;
                if options.len() < 2 {
                    return Err(Error::validation(format!(
                        "sample {}: `options` needs at least 2 entries, got {}",
                        self.id,
                        options.len()
                    )));
                }
                let mut labels: Vec<&str> = options.iter().map(|o| o.label.as_str()).collect();
                labels.sort_unstable();
                if labels.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::validation(format!(
                        "sample {}: option labels must be unique",
                        self.id
                    )));
                }
                let answer = self.answer.as_deref().ok_or_else(|| {
                    Error::validation(format!(
                        "sample {}: kind multiple_choice_qa requires `answer`",
                        self.id
                    ))
                })?;
                if !options.iter().any(|o| o.label == answer) {
                    return Err(Error::validation(format!(
                        "sample {}: `answer` {:?} matches no option label",
                        self.id, answer
                    )));
                }
            }
            SampleKind::ShortAnswerQa => {
                if self.question.is_none() || self.answer.is_none() {
                    return Err(Error::validation(format!(
                        "sample {}: kind short_answer_qa requires `question` and `answer`",
                        self.id
                    )));
                }
                if self.options.is_some() {
                    return Err(Error::validation(format!(
                        "sample {}: kind short_answer_qa forbids `options`",
                        self.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// The text the filtering and translation stages operate on:
    /// `raw_text` for raw records, `question ⊕ " " ⊕ answer` for QA records.
    pub fn scoring_text(&self) -> Result<String> {
        match self.kind {
            SampleKind::RawText => self
                .raw_text
                .clone()
                .ok_or_else(|| Error::validation(format!("sample {}: missing raw_text", self.id))),
            SampleKind::ShortAnswerQa | SampleKind::MultipleChoiceQa => {
                let question = self.question.as_deref().ok_or_else(|| {
                    Error::validation(format!("sample {}: missing question", self.id))
                })?;
                let answer = self.answer.as_deref().ok_or_else(|| {
                    Error::validation(format!("sample {}: missing answer", self.id))
                })?;
                Ok(format!("{question} {answer}"))
            }
        }
    }

    pub fn annotate(&mut self, key: impl Into<String>, value: impl Into<Scalar>) {
        self.annotations.insert(key.into(), value.into());
    }
}

/// Parse one JSONL line into a validated sample.
pub fn parse_sample(line: &str) -> Result<DataSample> {
    let sample: DataSample = serde_json::from_str(line).map_err(|e| Error::format(e.to_string()))?;
    sample.validate()?;
    Ok(sample)
}

/// Serialize a sample as a single JSON line (no trailing newline).
/// `parse_sample(serialize_sample(s))` reproduces `s` exactly.
pub fn serialize_sample(sample: &DataSample) -> String {
    serde_json::to_string(sample).expect("sample serialization cannot fail")
}

/// Read a whole JSONL stream, attaching 1-based line numbers to failures and
/// rejecting duplicate ids.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<DataSample>> {
    let mut samples = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::format(e.to_string()).at_line(lineno))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample = parse_sample(&line).map_err(|e| e.at_line(lineno))?;
        if !seen.insert(sample.id.clone()) {
            return Err(Error::Format {
                line: Some(lineno),
                msg: format!("duplicate sample id {:?}", sample.id),
            });
        }
        samples.push(sample);
    }
    Ok(samples)
}

pub fn read_samples_from_path(path: impl AsRef<Path>) -> Result<Vec<DataSample>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_samples(file).map_err(|e| match e {
        Error::Format { line, msg } => {
            Error::Format { line, msg: format!("{}: {msg}", path.display()) }
        }
        other => other,
    })
}

pub fn write_samples<W: Write>(mut writer: W, samples: &[DataSample]) -> Result<()> {
    for sample in samples {
        writeln!(writer, "{}", serialize_sample(sample))
            .map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}
