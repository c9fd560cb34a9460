use std::fmt;

/// Which tree representation a graph encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layout {
    Slt,
    Opt,
}

impl Layout {
    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Slt => "slt",
            Layout::Opt => "opt",
        }
    }

    pub fn parse(s: &str) -> Option<Layout> {
        match s.to_ascii_lowercase().as_str() {
            "slt" => Some(Layout::Slt),
            "opt" => Some(Layout::Opt),
            _ => None,
        }
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Variable,
    Number,
    Operator,
    Function,
    Structure,
}

impl NodeKind {
    pub fn prefix(self) -> &'static str {
        match self {
            NodeKind::Variable => "V!",
            NodeKind::Number => "N!",
            NodeKind::Operator => "O!",
            NodeKind::Function => "F!",
            NodeKind::Structure => "S!",
        }
    }

    pub fn from_label(label: &str) -> Option<NodeKind> {
        [NodeKind::Variable, NodeKind::Number, NodeKind::Operator, NodeKind::Function, NodeKind::Structure]
            .into_iter()
            .find(|k| label.starts_with(k.prefix()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Next,
    Sup,
    Sub,
    Over,
    Under,
    Within,
    Arg(u16),
}

impl EdgeLabel {
    pub fn parse(s: &str) -> Option<EdgeLabel> {
        Some(match s {
            "NEXT" => EdgeLabel::Next,
            "SUP" => EdgeLabel::Sup,
            "SUB" => EdgeLabel::Sub,
            "OVER" => EdgeLabel::Over,
            "UNDER" => EdgeLabel::Under,
            "WITHIN" => EdgeLabel::Within,
            _ => EdgeLabel::Arg(s.strip_prefix("ARG")?.parse().ok()?),
        })
    }

    pub fn is_slt(self) -> bool {
        !matches!(self, EdgeLabel::Arg(_))
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLabel::Next => f.write_str("NEXT"),
            EdgeLabel::Sup => f.write_str("SUP"),
            EdgeLabel::Sub => f.write_str("SUB"),
            EdgeLabel::Over => f.write_str("OVER"),
            EdgeLabel::Under => f.write_str("UNDER"),
            EdgeLabel::Within => f.write_str("WITHIN"),
            EdgeLabel::Arg(i) => write!(f, "ARG{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub kind: NodeKind,
    /// Full typed label, e.g. `V!x` or `O!add`.
    pub label: String,
}

impl Node {
    pub fn new(kind: NodeKind, lexeme: &str) -> Self {
        Node { kind, label: format!("{}{}", kind.prefix(), lexeme) }
    }

    /// Label with the kind prefix stripped.
    pub fn lexeme(&self) -> &str {
        &self.label[2..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
}

/// Labeled directed graph over dense node ids. Freshly built graphs are
/// rooted trees; augmented ones may be forests or edgeless.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MathGraph {
    pub layout: Layout,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub root: usize,
}

impl MathGraph {
    pub fn new(layout: Layout) -> Self {
        MathGraph { layout, nodes: Vec::new(), edges: Vec::new(), root: 0 }
    }

    pub fn add_node(&mut self, kind: NodeKind, lexeme: &str) -> usize {
        self.nodes.push(Node::new(kind, lexeme));
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, label: EdgeLabel) {
        self.edges.push(Edge { src, dst, label });
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges per node, in edge order.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.src].push(i);
        }
        out
    }

    /// True when the graph is a rooted tree: one parent per non-root node,
    /// none for the root, `|E| = |V| - 1`, and everything reachable from the root.
    pub fn is_rooted_tree(&self) -> bool {
        let n = self.nodes.len();
        if n == 0 || self.root >= n || self.edges.len() + 1 != n {
            return false;
        }
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return false;
            }
            indeg[e.dst] += 1;
        }
        if indeg[self.root] != 0 || indeg.iter().enumerate().any(|(i, &d)| i != self.root && d != 1) {
            return false;
        }
        let out = self.out_edges();
        let mut seen = vec![false; n];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &ei in &out[v] {
                let d = self.edges[ei].dst;
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    stack.push(d);
                }
            }
        }
        count == n
    }

    /// Every node's label prefix agrees with its kind, and edge labels belong
    /// to the layout's vocabulary.
    pub fn labels_consistent(&self) -> bool {
        let nodes_ok = self
            .nodes
            .iter()
            .all(|n| NodeKind::from_label(&n.label) == Some(n.kind) && n.label.len() > 2);
        let edges_ok = self.edges.iter().all(|e| match self.layout {
            Layout::Slt => e.label.is_slt(),
            Layout::Opt => !e.label.is_slt(),
        });
        nodes_ok && edges_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_label_text() {
        for l in [EdgeLabel::Next, EdgeLabel::Within, EdgeLabel::Arg(0), EdgeLabel::Arg(12)] {
            assert_eq!(EdgeLabel::parse(&l.to_string()), Some(l));
        }
        assert_eq!(EdgeLabel::parse("ARGx"), None);
    }

    #[test]
    fn tree_check_rejects_two_parents() {
        let mut g = MathGraph::new(Layout::Opt);
        let a = g.add_node(NodeKind::Operator, "add");
        let b = g.add_node(NodeKind::Variable, "x");
        let c = g.add_node(NodeKind::Variable, "y");
        g.add_edge(a, b, EdgeLabel::Arg(0));
        g.add_edge(c, b, EdgeLabel::Arg(1));
        assert!(!g.is_rooted_tree());
    }

    #[test]
    fn kind_from_label() {
        assert_eq!(NodeKind::from_label("S!frac"), Some(NodeKind::Structure));
        assert_eq!(NodeKind::from_label("x"), None);
    }
}
