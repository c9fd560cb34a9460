//! Construction of symbol layout trees (SLT) and operator trees (OPT).

use super::ast::{AstKind, BinOp, FormulaAst};
use super::graph::{EdgeLabel, Layout, MathGraph, NodeKind};

fn op_name(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "add",
        BinOp::Sub => "sub",
        BinOp::Mul | BinOp::Implicit => "mul",
    }
}

/// Builds the graph for the requested layout.
pub fn build_graph(ast: &FormulaAst, layout: Layout) -> MathGraph {
    match layout {
        Layout::Slt => build_slt(ast),
        Layout::Opt => build_opt(ast),
    }
}

/// Symbol layout tree: baselines become NEXT chains, scripts hang off the
/// last symbol of their base, fractions and radicals are structure nodes.
pub fn build_slt(ast: &FormulaAst) -> MathGraph {
    let mut g = MathGraph::new(Layout::Slt);
    let (first, _) = slt_baseline(ast, &mut g);
    g.root = first;
    g
}

/// Emits `ast` as a baseline and returns its (first, last) symbol nodes.
fn slt_baseline(ast: &FormulaAst, g: &mut MathGraph) -> (usize, usize) {
    match ast.kind {
        AstKind::Variable => {
            let n = g.add_node(NodeKind::Variable, &ast.lexeme);
            (n, n)
        }
        AstKind::Number => {
            let n = g.add_node(NodeKind::Number, &ast.lexeme);
            (n, n)
        }
        AstKind::BinaryOp => {
            let op = ast.bin_op().expect("binary operator lexeme");
            let (first, left_last) = slt_baseline(&ast.children[0], g);
            let join = if op == BinOp::Implicit {
                left_last
            } else {
                let o = g.add_node(NodeKind::Operator, op_name(op));
                g.add_edge(left_last, o, EdgeLabel::Next);
                o
            };
            let (right_first, last) = slt_baseline(&ast.children[1], g);
            g.add_edge(join, right_first, EdgeLabel::Next);
            (first, last)
        }
        AstKind::UnaryFunc => {
            let f = g.add_node(NodeKind::Function, &ast.lexeme);
            let last = slt_parenthesized(&ast.children[0], f, g);
            (f, last)
        }
        AstKind::Group => {
            let open = g.add_node(NodeKind::Structure, "lparen");
            let (inner_first, inner_last) = slt_baseline(&ast.children[0], g);
            g.add_edge(open, inner_first, EdgeLabel::Next);
            let close = g.add_node(NodeKind::Structure, "rparen");
            g.add_edge(inner_last, close, EdgeLabel::Next);
            (open, close)
        }
        AstKind::Fraction => {
            let frac = g.add_node(NodeKind::Structure, "frac");
            let (num, _) = slt_baseline(&ast.children[0], g);
            g.add_edge(frac, num, EdgeLabel::Over);
            let (den, _) = slt_baseline(&ast.children[1], g);
            g.add_edge(frac, den, EdgeLabel::Under);
            (frac, frac)
        }
        AstKind::Sqrt => {
            let root = g.add_node(NodeKind::Structure, "sqrt");
            let (inner, _) = slt_baseline(&ast.children[0], g);
            g.add_edge(root, inner, EdgeLabel::Within);
            (root, root)
        }
        AstKind::Script { .. } => {
            let (base, sup, sub) = ast.script_parts().expect("script node");
            let (first, anchor) = slt_baseline(base, g);
            if let Some(s) = sup {
                let (s_first, _) = slt_baseline(s, g);
                g.add_edge(anchor, s_first, EdgeLabel::Sup);
            }
            if let Some(s) = sub {
                let (s_first, _) = slt_baseline(s, g);
                g.add_edge(anchor, s_first, EdgeLabel::Sub);
            }
            (first, anchor)
        }
    }
}

/// Emits `( inner )` after `prev` on the same baseline and returns the closing paren.
fn slt_parenthesized(inner: &FormulaAst, prev: usize, g: &mut MathGraph) -> usize {
    let open = g.add_node(NodeKind::Structure, "lparen");
    g.add_edge(prev, open, EdgeLabel::Next);
    let (first, last) = slt_baseline(inner, g);
    g.add_edge(open, first, EdgeLabel::Next);
    let close = g.add_node(NodeKind::Structure, "rparen");
    g.add_edge(last, close, EdgeLabel::Next);
    close
}

/// Operator tree: operators, functions, fractions and radicals are internal
/// nodes with positional ARGi edges; parentheses vanish.
pub fn build_opt(ast: &FormulaAst) -> MathGraph {
    let mut g = MathGraph::new(Layout::Opt);
    g.root = opt_node(ast, &mut g);
    g
}

fn opt_node(ast: &FormulaAst, g: &mut MathGraph) -> usize {
    match ast.kind {
        AstKind::Variable => g.add_node(NodeKind::Variable, &ast.lexeme),
        AstKind::Number => g.add_node(NodeKind::Number, &ast.lexeme),
        AstKind::Group => opt_node(&ast.children[0], g),
        AstKind::BinaryOp => {
            let op = ast.bin_op().expect("binary operator lexeme");
            let o = g.add_node(NodeKind::Operator, op_name(op));
            opt_args(o, &ast.children, g);
            o
        }
        AstKind::UnaryFunc => {
            let f = g.add_node(NodeKind::Function, &ast.lexeme);
            opt_args(f, &ast.children, g);
            f
        }
        AstKind::Fraction => {
            let f = g.add_node(NodeKind::Structure, "frac");
            opt_args(f, &ast.children, g);
            f
        }
        AstKind::Sqrt => {
            let s = g.add_node(NodeKind::Structure, "sqrt");
            opt_args(s, &ast.children, g);
            s
        }
        AstKind::Script { .. } => {
            let (base, sup, sub) = ast.script_parts().expect("script node");
            // parents get lower ids than their operands
            let pow = sup.map(|_| g.add_node(NodeKind::Operator, "pow"));
            let operand = match sub {
                None => opt_node(base, g),
                Some(s) if base.kind == AstKind::Variable && is_atom(s) => {
                    g.add_node(NodeKind::Variable, &format!("{}_{}", base.lexeme, s.lexeme))
                }
                Some(s) => {
                    let o = g.add_node(NodeKind::Operator, "subscript");
                    let b = opt_node(base, g);
                    g.add_edge(o, b, EdgeLabel::Arg(0));
                    let si = opt_node(s, g);
                    g.add_edge(o, si, EdgeLabel::Arg(1));
                    o
                }
            };
            match (pow, sup) {
                (Some(p), Some(s)) => {
                    g.add_edge(p, operand, EdgeLabel::Arg(0));
                    let e = opt_node(s, g);
                    g.add_edge(p, e, EdgeLabel::Arg(1));
                    p
                }
                _ => operand,
            }
        }
    }
}

fn opt_args(parent: usize, children: &[FormulaAst], g: &mut MathGraph) {
    for (i, c) in children.iter().enumerate() {
        let n = opt_node(c, g);
        g.add_edge(parent, n, EdgeLabel::Arg(i as u16));
    }
}

fn is_atom(ast: &FormulaAst) -> bool {
    matches!(ast.kind, AstKind::Variable | AstKind::Number)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::graph::Edge;
    use crate::formula::parse_formula;

    fn labels(g: &MathGraph) -> Vec<&str> {
        g.nodes.iter().map(|n| n.label.as_str()).collect()
    }

    fn edge(src: usize, dst: usize, label: EdgeLabel) -> Edge {
        Edge { src, dst, label }
    }

    #[test]
    fn slt_superscript() {
        let g = build_slt(&parse_formula("x^{2}").unwrap());
        assert_eq!(labels(&g), ["V!x", "N!2"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Sup)]);
        assert_eq!(g.root, 0);
    }

    #[test]
    fn slt_sum_chain() {
        let g = build_slt(&parse_formula("x+y").unwrap());
        assert_eq!(labels(&g), ["V!x", "O!add", "V!y"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Next), edge(1, 2, EdgeLabel::Next)]);
        assert_eq!(g.root, 0);
    }

    #[test]
    fn slt_fraction() {
        let g = build_slt(&parse_formula(r"\frac{a}{b}").unwrap());
        assert_eq!(labels(&g), ["S!frac", "V!a", "V!b"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Over), edge(0, 2, EdgeLabel::Under)]);
        assert_eq!(g.root, 0);
    }

    #[test]
    fn slt_script_after_group_hangs_off_rparen() {
        let g = build_slt(&parse_formula("(a+b)^{2}c").unwrap());
        assert_eq!(labels(&g), ["S!lparen", "V!a", "O!add", "V!b", "S!rparen", "N!2", "V!c"]);
        assert!(g.edges.contains(&edge(4, 5, EdgeLabel::Sup)));
        assert!(g.edges.contains(&edge(4, 6, EdgeLabel::Next)));
        assert!(g.is_rooted_tree());
    }

    #[test]
    fn slt_function_and_radical() {
        let g = build_slt(&parse_formula(r"\sin(x)\sqrt{y}").unwrap());
        assert_eq!(labels(&g), ["F!sin", "S!lparen", "V!x", "S!rparen", "S!sqrt", "V!y"]);
        assert!(g.edges.contains(&edge(4, 5, EdgeLabel::Within)));
        assert!(g.edges.contains(&edge(3, 4, EdgeLabel::Next)));
        assert!(g.is_rooted_tree());
    }

    #[test]
    fn opt_sum() {
        let g = build_opt(&parse_formula("x+y").unwrap());
        assert_eq!(labels(&g), ["O!add", "V!x", "V!y"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Arg(0)), edge(0, 2, EdgeLabel::Arg(1))]);
        assert_eq!(g.root, 0);
    }

    #[test]
    fn opt_groups_are_transparent() {
        let a = build_opt(&parse_formula("(x+y)").unwrap());
        let b = build_opt(&parse_formula("x+y").unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn opt_fraction() {
        let g = build_opt(&parse_formula(r"\frac{a}{b}").unwrap());
        assert_eq!(labels(&g), ["S!frac", "V!a", "V!b"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Arg(0)), edge(0, 2, EdgeLabel::Arg(1))]);
    }

    #[test]
    fn opt_scripts() {
        let g = build_opt(&parse_formula("x^{2}_{i}").unwrap());
        assert_eq!(labels(&g), ["O!pow", "V!x_i", "N!2"]);
        let g = build_opt(&parse_formula("x_{i+1}").unwrap());
        assert_eq!(labels(&g), ["O!subscript", "V!x", "O!add", "V!i", "N!1"]);
        assert!(g.is_rooted_tree());
        // implicit and explicit products share one operator in OPT
        let a = build_opt(&parse_formula("2x").unwrap());
        let b = build_opt(&parse_formula("2*x").unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn slt_keeps_subscript_structural() {
        let g = build_slt(&parse_formula("x_{i}").unwrap());
        assert_eq!(labels(&g), ["V!x", "V!i"]);
        assert_eq!(g.edges, [edge(0, 1, EdgeLabel::Sub)]);
    }
}
