use super::graph::{MathGraph, Node, NodeKind};

/// Canonical depth-first serialization from the root. Children are ordered by
/// edge label, then child label. Components not reachable from the root
/// (augmented forests) follow in sorted order after `|`.
pub fn graph_signature(g: &MathGraph) -> String {
    signature_with(g, |n| n.label.clone())
}

/// Signature with every node label reduced to its kind prefix, so only
/// topology, node kinds and edge labels remain.
pub fn topology_signature(g: &MathGraph) -> String {
    signature_with(g, |n| n.kind.prefix().to_string())
}

/// Signature with variable and number lexemes erased; operators, functions
/// and structure nodes keep their labels. Two alpha-equivalent formulas share it.
pub fn abstract_signature(g: &MathGraph) -> String {
    signature_with(g, |n| match n.kind {
        NodeKind::Variable | NodeKind::Number => n.kind.prefix().to_string(),
        _ => n.label.clone(),
    })
}

fn signature_with(g: &MathGraph, label: impl Fn(&Node) -> String) -> String {
    let n = g.node_count();
    if n == 0 {
        return String::new();
    }
    let labels: Vec<String> = g.nodes.iter().map(&label).collect();
    let out = g.out_edges();
    let mut visited = vec![false; n];
    let mut has_parent = vec![false; n];
    for e in &g.edges {
        has_parent[e.dst] = true;
    }

    let mut sig = subtree(g, g.root, &labels, &out, &mut visited);
    let mut rest: Vec<String> = Vec::new();
    for v in (0..n).filter(|&v| !has_parent[v]) {
        if !visited[v] {
            rest.push(subtree(g, v, &labels, &out, &mut visited));
        }
    }
    // only reachable through cycles or multi-parent nodes
    for v in 0..n {
        if !visited[v] {
            rest.push(subtree(g, v, &labels, &out, &mut visited));
        }
    }
    rest.sort();
    for r in rest {
        sig.push('|');
        sig.push_str(&r);
    }
    sig
}

fn subtree(g: &MathGraph, v: usize, labels: &[String], out: &[Vec<usize>], visited: &mut [bool]) -> String {
    visited[v] = true;
    let mut kids: Vec<(String, &str, String)> = Vec::with_capacity(out[v].len());
    for &ei in &out[v] {
        let e = &g.edges[ei];
        let child = if visited[e.dst] { "^".to_string() } else { subtree(g, e.dst, labels, out, visited) };
        kids.push((e.label.to_string(), labels[e.dst].as_str(), child));
    }
    // edge label, then child label; full content breaks remaining ties
    kids.sort();
    let mut s = labels[v].clone();
    if !kids.is_empty() {
        let parts: Vec<String> = kids.into_iter().map(|(edge, _, child)| format!("{edge}:{child}")).collect();
        s.push('(');
        s.push_str(&parts.join(","));
        s.push(')');
    }
    s
}
