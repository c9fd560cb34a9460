use rand::Rng;

use crate::formula::MathGraph;

use super::skipgram::{train_token_embeddings, SkipGramConfig};
use super::table::EmbeddingTable;
use super::vocab::build_vocab;
use super::walks::{sample_walks, Walk};
use super::EmbedError;

/// Walk sampling plus skip-gram settings for one token table.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenConfig {
    pub walks_per_node: usize,
    /// Node visits per walk.
    pub walk_length: usize,
    pub min_count: u64,
    pub skipgram: SkipGramConfig,
}

impl Default for TokenConfig {
    fn default() -> Self {
        TokenConfig { walks_per_node: 10, walk_length: 5, min_count: 1, skipgram: SkipGramConfig::default() }
    }
}

/// Samples walks over every graph, builds the vocabulary and trains the
/// table. Returns the table and the per-epoch mean pair loss.
pub fn train_token_table(
    graphs: &[MathGraph],
    cfg: &TokenConfig,
    rng: &mut impl Rng,
) -> Result<(EmbeddingTable, Vec<f64>), EmbedError> {
    if cfg.walks_per_node == 0 || cfg.walk_length == 0 || cfg.min_count == 0 {
        return Err(EmbedError::InvalidConfig("walks_per_node, walk_length and min_count must be positive".into()));
    }
    let walks: Vec<Walk> = graphs.iter().flat_map(|g| sample_walks(g, cfg.walks_per_node, cfg.walk_length, rng)).collect();
    let vocab = build_vocab(&walks, cfg.min_count)?;
    Ok(train_token_embeddings(&walks, &vocab, &cfg.skipgram, rng))
}
