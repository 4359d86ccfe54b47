//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: data-level
//! problems (validation, format, parse) exit 1, provider/transport problems
//! exit 2, configuration and I/O problems exit 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a domain invariant (bad field, out-of-range score, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Malformed input data (bad JSON, broken record), with the source line
    /// when the failure came from a JSONL stream.
    #[error("format error{}: {msg}", fmt_line(.line))]
    Format { line: Option<usize>, msg: String },

    /// A structured LLM response did not match the expected grammar.
    #[error("parse error: {0}")]
    Parse(String),

    /// Provider/network failure (timeouts, HTTP errors, exhausted retries).
    #[error("transport error: {0}")]
    Transport(String),

    /// Bad configuration: unknown flags, unreadable config files, missing env.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format { line: None, msg: msg.into() }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn transport(msg: impl Into<String>) -> Self {
        Error::Transport(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Attach a line number to a format error; other variants pass through.
    pub fn at_line(self, line: usize) -> Self {
        match self {
            Error::Format { msg, .. } => Error::Format { line: Some(line), msg },
            other => other,
        }
    }

    /// Process exit code for the CLI: 1 data, 2 transport, 3 config/io.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Format { .. } | Error::Parse(_) => 1,
            Error::Transport(_) => 2,
            Error::Config(_) | Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
