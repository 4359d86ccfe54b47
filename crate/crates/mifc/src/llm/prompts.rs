//! The five prompt templates used by the pipeline stages.
//!
//! Placeholders are written `{name}` and drawn from a fixed set; rendering
//! substitutes bound values in a single pass, so braces inside substituted
//! text (or the literal JSON example in the judge prompt) are never
//! re-interpreted.

use std::fmt;

use regex::Regex;
use std::sync::OnceLock;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PromptId {
    Condense,
    GenQa,
    ExpandAnswer,
    JudgeQa,
    Translate,
}

impl fmt::Display for PromptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PromptId::Condense => "condense",
            PromptId::GenQa => "gen_qa",
            PromptId::ExpandAnswer => "expand_answer",
            PromptId::JudgeQa => "judge_qa",
            PromptId::Translate => "translate",
        };
        f.write_str(name)
    }
}

/// Every placeholder a template may reference.
pub const PLACEHOLDERS: [&str; 8] = [
    "LANG",
    "question",
    "answer_keywords",
    "original_text",
    "condensed_text",
    "qa_pair",
    "source_lang",
    "target_lang",
];

const CONDENSE: &str = "You’re an experienced {LANG} doctor, I have some medical texts in {LANG} that were extracted from several websites. Your task is to clean the texts and make them easy to read. Here are some detailed requirements:

1. You must ignore all links, references, and unknown characters. You MUST KEEP ALL MEDICAL-RELATED CONTENT in the texts.

2. Give the cleaned text directly without any other unnecessary words following the format of ###Cleaned Text: you cleaned text.

User Input: ###Input: {original_text}";

const GEN_QA: &str = "You’re a {LANG} medical expert tasked with creating medical questions and answers based on the short article provided. Here are the requirements:

1. For each article you read, you MUST create two types of questions: multiple-choice and short answers. One question for each type.

2. For the multiple-choice question, you MUST generate the answer choice in the following format: '###Question: your generated question\\n\\n###Options: A. optionA, B. optionB, C. optionC, D. optionD\\n\\n###Rationale: your explanation\\n\\n###Answer: correct answer index'

3. For the short answer question, You MUST use this format instead: '###Question: your generated question\\n\\n###Answer: your detailed answer and explanation'.

4. Multiple Choice and Short Answer questions you provided should in DIFFERENT TOPICS.

5. You MUST separate two questions by the separation symbol [SEP]. Complete the multiple-choice question first, and then switch to the short answer question.

6. You MUST strictly follow the above instructions, with NO OTHER UNNECESSARY WORDS in the output.

User Input: ###Input: {condensed_text}";

const EXPAND_ANSWER: &str = "You are an experienced {LANG} doctor who is tasked with answering general medical questions. Here are some detailed requirements:

1. I have the answer keywords for each question. I want you to expand and write complete sentences based on the question, and answer keywords provided.

2. Your answer MUST based on the keywords, no new stuff should be present. Give me the complete answer directly in {LANG}.

User Input: ###Question: {question}, ###Answer Keywords: {answer_keywords}";

const JUDGE_QA: &str = "You are an experienced and knowledgable {LANG} medical school professor. You are given a short text paired with a question-answer pair that is created based on the text. Your task is to verify the correctness of the question-answer pair. Here are some detailed requirements.

1. Based on the text provided, check whether the question-answer pair is logically consistent, factually accurate, and sound reasoning. Assign a CONTINOUS score BETWEEN 0 AND 1 for each of the criteria.

2. Only return a JSON dictionary containing THREE KEY-VALUE pairs. Here is an example that you can refer to: {'logically consistent':0.9, 'factually accurate':0.85, 'sound reasoning':1.0}

User Input: ###Context: {condensed_text}###Input: {qa_pair}";

const TRANSLATE: &str = "You are a professional medical translator translating from {source_lang} to {target_lang}. Here are some detailed requirements:

1. Translate the input text from {source_lang} to {target_lang} exactly, preserving all medical content and meaning. Do not add, remove, or reinterpret information.

2. Give the translated text directly without any other unnecessary words.

User Input: ###Input: {original_text}";

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub id: PromptId,
    pub body: &'static str,
}

impl PromptTemplate {
    pub fn get(id: PromptId) -> PromptTemplate {
        let body = match id {
            PromptId::Condense => CONDENSE,
            PromptId::GenQa => GEN_QA,
            PromptId::ExpandAnswer => EXPAND_ANSWER,
            PromptId::JudgeQa => JUDGE_QA,
            PromptId::Translate => TRANSLATE,
        };
        PromptTemplate { id, body }
    }

    /// Substitute placeholder bindings into the template body.
    ///
    /// Every placeholder occurring in the body must be bound or rendering
    /// fails naming the missing one. Substitution is single-pass: bound
    /// values are copied verbatim and never re-scanned.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String> {
        let re = placeholder_regex();
        let mut out = String::with_capacity(self.body.len());
        let mut cursor = 0;
        for m in re.find_iter(self.body) {
            out.push_str(&self.body[cursor..m.start()]);
            let name = &self.body[m.start() + 1..m.end() - 1];
            match bindings.iter().find(|(k, _)| *k == name) {
                Some((_, value)) => out.push_str(value),
                None => {
                    return Err(Error::validation(format!(
                        "prompt {}: placeholder {{{name}}} is not bound",
                        self.id
                    )))
                }
            }
            cursor = m.end();
        }
        out.push_str(&self.body[cursor..]);
        Ok(out)
    }
}

fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let alternation = PLACEHOLDERS.join("|");
        Regex::new(&format!(r"\{{({alternation})\}}")).unwrap()
    })
}
