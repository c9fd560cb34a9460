//! Random-walk token sequences and subword skip-gram token embeddings.

mod featurize;
mod pipeline;
mod skipgram;
mod subword;
mod table;
mod vocab;
mod walks;

use std::io;

use thiserror::Error;

pub use featurize::{featurize, FeaturedGraph, Featurizer};
pub use pipeline::{train_token_table, TokenConfig};
pub use skipgram::{train_token_embeddings, SkipGramConfig, SkipGramPair, SkipGramPairGrad};
pub use subword::{fnv1a32, ngram_buckets, ngrams};
pub use table::EmbeddingTable;
pub(crate) use table::{read_f32s, write_f32s};
pub use vocab::{build_vocab, unigram_distribution, Vocabulary};
pub use walks::{sample_walks, Walk};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no token reaches the minimum count")]
    EmptyVocabulary,
    #[error("embedding table I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt embedding table: {0}")]
    CorruptTable(String),
    #[error("invalid token embedding config: {0}")]
    InvalidConfig(String),
    #[error("embedding table version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}
