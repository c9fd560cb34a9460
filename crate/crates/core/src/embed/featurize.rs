use std::collections::HashMap;

use crate::formula::MathGraph;
use crate::linalg::Matrix;

use super::table::EmbeddingTable;

/// A graph with one feature row per node and per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturedGraph {
    pub graph: MathGraph,
    /// `|V| × d`, row `i` is the vector of node `i`'s label.
    pub node_features: Matrix,
    /// `|E| × d_e`, row `j` is the truncated vector of edge `j`'s label.
    pub edge_features: Matrix,
}

impl FeaturedGraph {
    pub fn is_consistent(&self) -> bool {
        self.node_features.rows == self.graph.node_count() && self.edge_features.rows == self.graph.edge_count()
    }
}

/// Featurizes graphs against one table, memoizing token vectors.
pub struct Featurizer<'a> {
    table: &'a EmbeddingTable,
    edge_dim: usize,
    cache: HashMap<String, Vec<f64>>,
}

impl<'a> Featurizer<'a> {
    pub fn new(table: &'a EmbeddingTable, edge_dim: usize) -> Self {
        assert!(edge_dim <= table.dim, "edge feature width exceeds the embedding width");
        Featurizer { table, edge_dim, cache: HashMap::new() }
    }

    pub fn table(&self) -> &'a EmbeddingTable {
        self.table
    }

    pub fn edge_dim(&self) -> usize {
        self.edge_dim
    }

    pub fn vector(&mut self, token: &str) -> &[f64] {
        let table = self.table;
        self.cache.entry(token.to_string()).or_insert_with(|| table.token_vector(token))
    }

    pub fn featurize(&mut self, g: &MathGraph) -> FeaturedGraph {
        let d = self.table.dim;
        let mut nodes = Matrix::zeros(g.node_count(), d);
        for (i, n) in g.nodes.iter().enumerate() {
            let v = self.vector(&n.label).to_vec();
            nodes.row_mut(i).copy_from_slice(&v);
        }
        let de = self.edge_dim;
        let mut edges = Matrix::zeros(g.edge_count(), de);
        for (j, e) in g.edges.iter().enumerate() {
            let v = self.vector(&e.label.to_string())[..de].to_vec();
            edges.row_mut(j).copy_from_slice(&v);
        }
        FeaturedGraph { graph: g.clone(), node_features: nodes, edge_features: edges }
    }
}

/// Node rows are label vectors; edge rows are label vectors truncated to `edge_dim`.
pub fn featurize(g: &MathGraph, table: &EmbeddingTable, edge_dim: usize) -> FeaturedGraph {
    Featurizer::new(table, edge_dim).featurize(g)
}
