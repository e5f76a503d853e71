//! Library behind the `delaycode` binary: file formats, the stream format,
//! the Huffman reference, the one-bit-delay micro search, and the command
//! implementations.

pub mod cmd;
pub mod huffman;
pub mod json;
pub mod micro;
pub mod stream;

use std::fmt;

/// Command-level failure, split by exit code: parse problems exit 2,
/// semantic problems exit 1.
#[derive(Debug, Clone)]
pub enum CliError {
    Parse(String),
    Semantic(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Semantic(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Semantic(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<delaycode_core::Error> for CliError {
    fn from(e: delaycode_core::Error) -> Self {
        CliError::Semantic(e.to_string())
    }
}

/// Whether `DELAYCODE_GUARD_OVERRIDE=1` lifts the resource guards.
pub fn guards_lifted() -> bool {
    std::env::var("DELAYCODE_GUARD_OVERRIDE")
        .map(|v| v == "1")
        .unwrap_or(false)
}
