//! Recursive-descent parser for the supported LaTeX subset.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | juxtaposition) factor)*
//! factor := base ('^{' expr '}')? ('_{' expr '}')?
//! base   := var | number | '(' expr ')' | '\frac{' expr '}{' expr '}'
//!         | '\sqrt{' expr '}' | func '(' expr ')'
//! ```
//!
//! Super- and subscripts may appear in either order, each at most once.

use thiserror::Error;

use super::ast::{is_number_lexeme, BinOp, FormulaAst, FUNCTIONS, GREEK};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        SyntaxError { offset, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Var(String),
    Num(String),
    Func(String),
    Frac,
    Sqrt,
    Plus,
    Minus,
    Star,
    Caret,
    Underscore,
    LBrace,
    RBrace,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Func(f) => format!("`\\{f}`"),
            Tok::Frac => "`\\frac`".into(),
            Tok::Sqrt => "`\\sqrt`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'_' => Tok::Underscore,
            b'{' => Tok::LBrace,
            b'}' => Tok::RBrace,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < bytes.len() && bytes[j] == b'.' && bytes[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let lexeme = &text[i..j];
                debug_assert!(is_number_lexeme(lexeme));
                i = j;
                out.push((start, Tok::Num(lexeme.to_string())));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' => Tok::Var((b as char).to_string()),
            b'\\' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_alphabetic() {
                    j += 1;
                }
                let name = &text[i + 1..j];
                let tok = match name {
                    "frac" => Tok::Frac,
                    "sqrt" => Tok::Sqrt,
                    _ if FUNCTIONS.contains(&name) => Tok::Func(name.to_string()),
                    _ if GREEK.contains(&name) => Tok::Var(name.to_string()),
                    "" => return Err(SyntaxError::new(start, "dangling backslash")),
                    _ => return Err(SyntaxError::new(start, format!("unsupported command `\\{name}`"))),
                };
                i = j;
                out.push((start, tok));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(SyntaxError::new(start, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError::new(self.offset(), format!("expected {wanted}, found {}", t.describe())),
            None => SyntaxError::new(self.end, format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn expr(&mut self) -> Result<FormulaAst, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = FormulaAst::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<FormulaAst, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    BinOp::Mul
                }
                Some(t) if starts_base(t) => BinOp::Implicit,
                _ => return Ok(lhs),
            };
            let rhs = self.factor()?;
            lhs = FormulaAst::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<FormulaAst, SyntaxError> {
        let base = self.base()?;
        let mut sup = None;
        let mut sub = None;
        loop {
            let slot = match self.peek() {
                Some(Tok::Caret) => &mut sup,
                Some(Tok::Underscore) => &mut sub,
                _ => break,
            };
            if slot.is_some() {
                return Err(SyntaxError::new(self.offset(), "duplicate script"));
            }
            self.pos += 1;
            self.expect(Tok::LBrace)?;
            *slot = Some(self.expr()?);
            self.expect(Tok::RBrace)?;
        }
        if sup.is_none() && sub.is_none() {
            Ok(base)
        } else {
            Ok(FormulaAst::script(base, sup, sub))
        }
    }

    fn braced(&mut self) -> Result<FormulaAst, SyntaxError> {
        self.expect(Tok::LBrace)?;
        let e = self.expr()?;
        self.expect(Tok::RBrace)?;
        Ok(e)
    }

    fn base(&mut self) -> Result<FormulaAst, SyntaxError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("an operand"));
        };
        match tok {
            Tok::Var(v) => {
                self.pos += 1;
                Ok(FormulaAst::var(v))
            }
            Tok::Num(n) => {
                self.pos += 1;
                Ok(FormulaAst::num(n))
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(FormulaAst::group(inner))
            }
            Tok::Frac => {
                self.pos += 1;
                let num = self.braced()?;
                let den = self.braced()?;
                Ok(FormulaAst::frac(num, den))
            }
            Tok::Sqrt => {
                self.pos += 1;
                Ok(FormulaAst::sqrt(self.braced()?))
            }
            Tok::Func(name) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(FormulaAst::func(name, arg))
            }
            _ => Err(self.unexpected("an operand")),
        }
    }
}

fn starts_base(t: &Tok) -> bool {
    matches!(t, Tok::Var(_) | Tok::Num(_) | Tok::LParen | Tok::Frac | Tok::Sqrt | Tok::Func(_))
}

/// Parses a formula in the supported LaTeX subset.
pub fn parse_formula(text: &str) -> Result<FormulaAst, SyntaxError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(SyntaxError::new(0, "empty formula"));
    }
    let mut p = Parser { toks, pos: 0, end: text.len() };
    let ast = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.unexpected("end of input"));
    }
    Ok(ast)
}

/// Number of lexical tokens in `text`, or the lexing error.
pub fn token_count(text: &str) -> Result<usize, SyntaxError> {
    lex(text).map(|t| t.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::ast::AstKind;

    fn v(x: &str) -> FormulaAst {
        FormulaAst::var(x)
    }

    #[test]
    fn sum_of_two_variables() {
        assert_eq!(parse_formula("x+y").unwrap(), FormulaAst::binary(BinOp::Add, v("x"), v("y")));
    }

    #[test]
    fn scripts_bind_tighter_than_plus() {
        let expected = FormulaAst::binary(
            BinOp::Add,
            FormulaAst::script(v("x"), Some(FormulaAst::num("2")), None),
            FormulaAst::num("1"),
        );
        assert_eq!(parse_formula("x^{2}+1").unwrap(), expected);
    }

    #[test]
    fn fraction_with_sum_denominator() {
        let expected = FormulaAst::frac(v("a"), FormulaAst::binary(BinOp::Add, v("b"), v("c")));
        assert_eq!(parse_formula(r"\frac{a}{b+c}").unwrap(), expected);
    }

    #[test]
    fn left_associative_and_precedence() {
        // a - b + c d  ==  ((a - b) + (c d))
        let ast = parse_formula("a-b+c d").unwrap();
        let expected = FormulaAst::binary(
            BinOp::Add,
            FormulaAst::binary(BinOp::Sub, v("a"), v("b")),
            FormulaAst::binary(BinOp::Implicit, v("c"), v("d")),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn implicit_and_explicit_products() {
        let ast = parse_formula(r"2x*\sin(y)").unwrap();
        assert_eq!(ast.bin_op(), Some(BinOp::Mul));
        assert_eq!(ast.children[0].bin_op(), Some(BinOp::Implicit));
        assert_eq!(ast.children[1].kind, AstKind::UnaryFunc);
    }

    #[test]
    fn greek_and_decimal() {
        let ast = parse_formula(r"\alpha 3.25").unwrap();
        assert_eq!(ast.children[0], v("alpha"));
        assert_eq!(ast.children[1], FormulaAst::num("3.25"));
    }

    #[test]
    fn scripts_in_either_order() {
        let a = parse_formula("x^{2}_{i}").unwrap();
        let b = parse_formula("x_{i}^{2}").unwrap();
        assert_eq!(a, b);
        assert!(parse_formula("x^{2}^{3}").is_err());
    }

    #[test]
    fn error_offsets() {
        assert_eq!(parse_formula("x+").unwrap_err().offset, 2);
        assert_eq!(parse_formula("(x+y").unwrap_err().offset, 4);
        assert_eq!(parse_formula("x+y)").unwrap_err().offset, 3);
        assert_eq!(parse_formula(r"\frac{a}{b").unwrap_err().offset, 10);
        assert_eq!(parse_formula("x $ y").unwrap_err().offset, 2);
        assert_eq!(parse_formula(r"x+\foo").unwrap_err().offset, 2);
        assert_eq!(parse_formula("x^2").unwrap_err().offset, 2);
        assert_eq!(parse_formula("").unwrap_err().offset, 0);
        assert_eq!(parse_formula("   ").unwrap_err().offset, 0);
        assert!(parse_formula(r"\sin x").is_err());
    }

    #[test]
    fn token_counts() {
        assert_eq!(token_count(r"\sin(x)+12").unwrap(), 6);
    }
}
