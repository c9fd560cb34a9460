//! Formula parsing and the two tree representations built from it.

mod ast;
mod build;
mod corpus;
mod gen;
mod graph;
mod parser;
mod signature;
mod unparse;

pub use ast::{is_number_lexeme, is_variable_lexeme, AstKind, BinOp, FormulaAst, FUNCTIONS, GREEK};
pub use build::{build_graph, build_opt, build_slt};
pub use corpus::{
    load_corpus, parse_corpus, parse_records, read_records, write_records, CorpusError, CorpusRecord,
};
pub use gen::FormulaSampler;
pub use graph::{Edge, EdgeLabel, Layout, MathGraph, Node, NodeKind};
pub use parser::{parse_formula, token_count, SyntaxError};
pub use signature::{abstract_signature, graph_signature, topology_signature};
pub use unparse::unparse;
