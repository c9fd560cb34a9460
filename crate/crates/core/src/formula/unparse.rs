use super::ast::{AstKind, FormulaAst};

/// Deterministic pretty-printer; `parse_formula(&unparse(a)) == a` for every
/// AST produced by the parser.
pub fn unparse(ast: &FormulaAst) -> String {
    let mut out = String::new();
    write_ast(ast, &mut out);
    out
}

fn write_ast(ast: &FormulaAst, out: &mut String) {
    match ast.kind {
        AstKind::Variable => {
            if ast.lexeme.len() > 1 {
                out.push('\\');
            }
            out.push_str(&ast.lexeme);
        }
        AstKind::Number => out.push_str(&ast.lexeme),
        AstKind::BinaryOp => {
            write_ast(&ast.children[0], out);
            if ast.lexeme.is_empty() {
                out.push(' ');
            } else {
                out.push_str(&ast.lexeme);
            }
            write_ast(&ast.children[1], out);
        }
        AstKind::UnaryFunc => {
            out.push('\\');
            out.push_str(&ast.lexeme);
            out.push('(');
            write_ast(&ast.children[0], out);
            out.push(')');
        }
        AstKind::Fraction => {
            out.push_str("\\frac{");
            write_ast(&ast.children[0], out);
            out.push_str("}{");
            write_ast(&ast.children[1], out);
            out.push('}');
        }
        AstKind::Sqrt => {
            out.push_str("\\sqrt{");
            write_ast(&ast.children[0], out);
            out.push('}');
        }
        AstKind::Group => {
            out.push('(');
            write_ast(&ast.children[0], out);
            out.push(')');
        }
        AstKind::Script { .. } => {
            let (base, sup, sub) = ast.script_parts().expect("script node");
            write_ast(base, out);
            if let Some(s) = sup {
                out.push_str("^{");
                write_ast(s, out);
                out.push('}');
            }
            if let Some(s) = sub {
                out.push_str("_{");
                write_ast(s, out);
                out.push('}');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn canonical_forms() {
        for (src, want) in [
            ("x + y", "x+y"),
            (r"\alpha x", r"\alpha x"),
            ("2x", "2 x"),
            (r"x_{i}^{2}", "x^{2}_{i}"),
            (r"\frac{a}{\sqrt{b}}", r"\frac{a}{\sqrt{b}}"),
            (r"\exp( x )", r"\exp(x)"),
        ] {
            assert_eq!(unparse(&parse_formula(src).unwrap()), want);
        }
    }
}
