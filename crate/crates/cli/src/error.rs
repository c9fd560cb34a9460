use std::fmt;
use std::io;

use formula_gcl::augment::AugmentError;
use formula_gcl::embed::EmbedError;
use formula_gcl::encoder::EncoderError;
use formula_gcl::eval::EvalError;
use formula_gcl::formula::{CorpusError, SyntaxError};
use formula_gcl::index::IndexError;

pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;

/// A failed command: the message for stderr and the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INVALID, message: message.into() }
    }

    pub fn io(context: impl fmt::Display, e: io::Error) -> Self {
        CliError { code: EXIT_IO, message: format!("{context}: {e}") }
    }

    fn with(code: u8, e: impl fmt::Display) -> Self {
        CliError { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn corpus_code(e: &CorpusError) -> u8 {
    match e {
        CorpusError::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

fn embed_code(e: &EmbedError) -> u8 {
    match e {
        EmbedError::Io(_) => EXIT_IO,
        EmbedError::VersionMismatch { .. } => EXIT_MISMATCH,
        _ => EXIT_INVALID,
    }
}

fn encoder_code(e: &EncoderError) -> u8 {
    match e {
        EncoderError::Io(_) => EXIT_IO,
        EncoderError::VersionMismatch { .. } => EXIT_MISMATCH,
        _ => EXIT_INVALID,
    }
}

fn index_code(e: &IndexError) -> u8 {
    match e {
        IndexError::Io(_) => EXIT_IO,
        IndexError::VersionMismatch { .. } | IndexError::ProvenanceMismatch { .. } => EXIT_MISMATCH,
        IndexError::Encoder { source, .. } => encoder_code(source),
        _ => EXIT_INVALID,
    }
}

fn eval_code(e: &EvalError) -> u8 {
    match e {
        EvalError::Io(_) => EXIT_IO,
        EvalError::Cell { source, .. } => eval_code(source),
        EvalError::Corpus(e) => corpus_code(e),
        EvalError::Embed(e) => embed_code(e),
        EvalError::Encoder(e) => encoder_code(e),
        EvalError::Index(e) => index_code(e),
        _ => EXIT_INVALID,
    }
}

macro_rules! from_error {
    ($($ty:ty => $code:expr),* $(,)?) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                let code = $code(&e);
                CliError::with(code, e)
            }
        })*
    };
}

from_error! {
    CorpusError => corpus_code,
    EmbedError => embed_code,
    EncoderError => encoder_code,
    IndexError => index_code,
    EvalError => eval_code,
    SyntaxError => |_: &SyntaxError| EXIT_INVALID,
    AugmentError => |_: &AugmentError| EXIT_INVALID,
}
