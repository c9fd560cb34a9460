//! Exhaustive cosine retrieval over formula embeddings.

mod file;
mod run;

use std::collections::HashSet;
use std::io;

use thiserror::Error;

use crate::embed::{EmbeddingTable, Featurizer};
use crate::encoder::{baseline_embed, encode_batch, EncoderError, EncoderParams};
use crate::formula::{build_graph, parse_formula, FormulaAst, Layout, SyntaxError};
use crate::linalg::{dot, norm};

pub use file::INDEX_VERSION;
pub use run::{format_run, parse_run, read_run, write_run, RankedList};

/// Checkpoint id recorded for indexes built from untrained mean embeddings.
pub const BASELINE_ID: &str = "baseline";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("cosine of a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("formula {id}: {source}")]
    Syntax { id: String, source: SyntaxError },
    #[error("formula {id}: {source}")]
    Encoder { id: String, source: EncoderError },
    #[error("duplicate formula id `{0}`")]
    DuplicateId(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("provenance mismatch: index built with {index}, query embedded with {query}")]
    ProvenanceMismatch { index: String, query: String },
    #[error("index I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt index file: {0}")]
    CorruptIndex(String),
    #[error("index version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("run file line {line}: {message}")]
    MalformedRun { line: usize, message: String },
}

/// `u·v / (‖u‖‖v‖)`
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, IndexError> {
    if u.len() != v.len() {
        return Err(IndexError::DimensionMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(IndexError::ZeroVector);
    }
    Ok(dot(u, v) / (nu * nv))
}

/// What produced an index's rows. Queries must be embedded under the same one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// Checkpoint id, or [`BASELINE_ID`].
    pub checkpoint: String,
    /// Fingerprint of the token embedding table.
    pub table: String,
    pub layout: Layout,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "checkpoint {} / table {} / {}", self.checkpoint, self.table, self.layout.as_str())
    }
}

/// Maps formulas to unit embeddings: the trained encoder, or the untrained
/// mean-of-token-embeddings baseline when no parameters are given.
pub struct FormulaEmbedder<'a> {
    table: &'a EmbeddingTable,
    params: Option<&'a EncoderParams>,
    layout: Layout,
    provenance: Provenance,
}

impl<'a> FormulaEmbedder<'a> {
    pub fn trained(table: &'a EmbeddingTable, params: &'a EncoderParams, checkpoint_id: &str, layout: Layout) -> Self {
        FormulaEmbedder {
            table,
            params: Some(params),
            layout,
            provenance: Provenance { checkpoint: checkpoint_id.to_string(), table: table.fingerprint(), layout },
        }
    }

    pub fn baseline(table: &'a EmbeddingTable, layout: Layout) -> Self {
        FormulaEmbedder {
            table,
            params: None,
            layout,
            provenance: Provenance { checkpoint: BASELINE_ID.to_string(), table: table.fingerprint(), layout },
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.params.map_or(self.table.dim, EncoderParams::output_dim)
    }

    /// Embeds `(id, formula)` pairs; errors carry the formula id.
    pub fn embed_all(&self, formulas: &[(String, FormulaAst)]) -> Result<Vec<Vec<f64>>, IndexError> {
        let edge_dim = self.params.map_or(0, |p| p.edge_dim);
        let mut featurizer = Featurizer::new(self.table, edge_dim);
        let featured: Vec<_> = formulas.iter().map(|(_, ast)| featurizer.featurize(&build_graph(ast, self.layout))).collect();
        let Some(params) = self.params else {
            return Ok(featured.iter().map(baseline_embed).collect());
        };
        let mut out = Vec::with_capacity(formulas.len());
        for (chunk, ids) in featured.chunks(256).zip(formulas.chunks(256)) {
            let refs: Vec<_> = chunk.iter().collect();
            match encode_batch(params, &refs) {
                Ok(m) => out.extend((0..m.rows).map(|r| m.row(r).to_vec())),
                Err(_) => {
                    // find the offending formula for the error message
                    for (fg, (id, _)) in chunk.iter().zip(ids) {
                        encode_batch(params, &[fg])
                            .map_err(|source| IndexError::Encoder { id: id.clone(), source })?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn embed_text(&self, latex: &str) -> Result<Vec<f64>, IndexError> {
        let ast = parse_formula(latex).map_err(|source| IndexError::Syntax { id: "<query>".into(), source })?;
        Ok(self.embed_all(&[("<query>".to_string(), ast)])?.remove(0))
    }
}

/// Formula ids with unit-norm `f32` rows, in corpus order.
#[derive(Debug, Clone, PartialEq)]
pub struct FormulaIndex {
    pub dim: usize,
    pub provenance: Provenance,
    pub ids: Vec<String>,
    pub rows: Vec<f32>,
}

impl FormulaIndex {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.rows[i * self.dim..(i + 1) * self.dim]
    }

    /// Every row scored against `q`, ranked by descending score with ties
    /// broken by ascending id, truncated to `k`.
    pub fn search(&self, query_id: &str, q: &[f64], k: usize) -> Result<RankedList, IndexError> {
        if k == 0 {
            return Err(IndexError::InvalidK);
        }
        if q.len() != self.dim {
            return Err(IndexError::DimensionMismatch(q.len(), self.dim));
        }
        // the query is rounded like the stored rows, so identical formulas
        // score bit-identically and fall back to the id tie-break
        let q: Vec<f64> = q.iter().map(|&x| x as f32 as f64).collect();
        let qn = norm(&q);
        if qn == 0.0 {
            return Err(IndexError::ZeroVector);
        }
        let mut scored: Vec<(usize, f64)> = (0..self.len())
            .map(|i| {
                let row = self.row(i);
                let (mut d, mut rn) = (0.0, 0.0);
                for (&x, &y) in row.iter().zip(&q) {
                    let x = x as f64;
                    d += x * y;
                    rn += x * x;
                }
                (i, d / (qn * rn.sqrt()))
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| self.ids[a.0].cmp(&self.ids[b.0])));
        scored.truncate(k);
        Ok(RankedList {
            query_id: query_id.to_string(),
            results: scored.into_iter().map(|(i, s)| (self.ids[i].clone(), s)).collect(),
        })
    }
}

/// Embeds every corpus formula; index order is corpus order.
pub fn build_index(corpus: &[(String, FormulaAst)], embedder: &FormulaEmbedder<'_>) -> Result<FormulaIndex, IndexError> {
    let mut seen = HashSet::new();
    if let Some((id, _)) = corpus.iter().find(|(id, _)| !seen.insert(id.as_str())) {
        return Err(IndexError::DuplicateId(id.clone()));
    }
    let embeddings = embedder.embed_all(corpus)?;
    let dim = embedder.dim();
    let rows = embeddings.iter().flat_map(|e| e.iter().map(|&x| x as f32)).collect();
    Ok(FormulaIndex {
        dim,
        provenance: embedder.provenance().clone(),
        ids: corpus.iter().map(|(id, _)| id.clone()).collect(),
        rows,
    })
}

/// Parses and embeds `latex` under `embedder` and ranks the index against it.
pub fn query(
    index: &FormulaIndex,
    embedder: &FormulaEmbedder<'_>,
    query_id: &str,
    latex: &str,
    k: usize,
) -> Result<RankedList, IndexError> {
    if k == 0 {
        return Err(IndexError::InvalidK);
    }
    if embedder.provenance() != &index.provenance {
        return Err(IndexError::ProvenanceMismatch {
            index: index.provenance.to_string(),
            query: embedder.provenance().to_string(),
        });
    }
    let q = embedder.embed_text(latex)?;
    index.search(query_id, &q, k)
}
