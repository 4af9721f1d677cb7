use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("{what}, line {line}: {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("shape mismatch for tensor `{name}`: expected {expected:?}, found {found:?}")]
    Shape {
        name: String,
        expected: [usize; 2],
        found: [usize; 2],
    },

    #[error("tokenizer and checkpoint do not match: {0}")]
    Mismatch(String),

    #[error("non-finite loss at step {step}")]
    NonFinite { step: u64 },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
