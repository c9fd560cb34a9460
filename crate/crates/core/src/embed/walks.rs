use rand::Rng;

use crate::formula::MathGraph;

/// Alternating node/edge label sequence: `node (edge node)*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub tokens: Vec<String>,
}

impl Walk {
    /// Number of nodes visited.
    pub fn node_visits(&self) -> usize {
        self.tokens.len().div_ceil(2)
    }
}

/// Starts `walks_per_node` walks from every node, in node-id order. Each step
/// follows a uniformly chosen outgoing edge; a walk ends after `max_len` node
/// visits or at a node without outgoing edges.
pub fn sample_walks(g: &MathGraph, walks_per_node: usize, max_len: usize, rng: &mut impl Rng) -> Vec<Walk> {
    assert!(walks_per_node >= 1 && max_len >= 1, "walks_per_node and max_len must be positive");
    let out = g.out_edges();
    let mut walks = Vec::with_capacity(g.node_count() * walks_per_node);
    for start in 0..g.node_count() {
        for _ in 0..walks_per_node {
            let mut tokens = vec![g.nodes[start].label.clone()];
            let mut at = start;
            for _ in 1..max_len {
                let choices = &out[at];
                if choices.is_empty() {
                    break;
                }
                let e = &g.edges[choices[rng.gen_range(0..choices.len())]];
                tokens.push(e.label.to_string());
                tokens.push(g.nodes[e.dst].label.clone());
                at = e.dst;
            }
            walks.push(Walk { tokens });
        }
    }
    walks
}
