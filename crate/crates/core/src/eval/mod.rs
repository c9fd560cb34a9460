//! bpref evaluation, the synthetic benchmark and the augmentation ×
//! batch-size experiment grid.

mod bpref;
mod grid;
mod heatmap;
mod qrels;
mod synth;

use std::io;

use thiserror::Error;

use crate::embed::EmbedError;
use crate::encoder::EncoderError;
use crate::formula::CorpusError;
use crate::index::IndexError;

pub use bpref::{bpref, evaluate, RunScore};
pub use grid::{
    cell_seed, cell_stats, format_results_csv, layout_table, parse_results_csv, run_cell, run_experiment, CellSpec,
    CellStats, GridConfig, Method, ResultRow, RESULTS_HEADER,
};
pub use heatmap::{render_heatmap, Heatmap, HEATMAP_HEADER};
pub use qrels::{binarize, load_qrels, parse_qrels, Judgments, QRels, RelevanceSetting, MAX_SCORE};
pub use synth::{generate_synthetic_benchmark, SynthConfig, SyntheticBenchmark};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("I/O: {0}")]
    Io(#[from] io::Error),
    #[error("qrels line {line}: {message}")]
    MalformedQrels { line: usize, message: String },
    #[error("qrels line {line}: score {score} outside 0..=4")]
    Range { line: usize, score: i64 },
    #[error("qrels line {line}: duplicate judgment for ({qid}, {docid})")]
    DuplicateJudgment { line: usize, qid: String, docid: String },
    #[error("query has no relevant judgments")]
    NoRelevantJudgments,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("results line {line}: {message}")]
    MalformedResults { line: usize, message: String },
    #[error("no results for cell layout={layout} setting={setting} augmentation={method} batch_size={batch_size}")]
    MissingCell { layout: String, setting: String, method: String, batch_size: usize },
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<EvalError>,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Index(#[from] IndexError),
}
