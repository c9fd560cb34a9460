use std::fmt;

/// Syntactic category of an AST node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AstKind {
    Variable,
    Number,
    BinaryOp,
    UnaryFunc,
    Fraction,
    Sqrt,
    Group,
    /// Base with optional super- and subscript. Children are `[base, sup?, sub?]`;
    /// which of the optional slots are present is recorded in the flags.
    Script { sup: bool, sub: bool },
}

/// Binary operators of the grammar. `Implicit` is juxtaposition (`2x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Implicit,
}

impl BinOp {
    pub fn lexeme(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Implicit => "",
        }
    }

    pub fn from_lexeme(s: &str) -> Option<BinOp> {
        match s {
            "+" => Some(BinOp::Add),
            "-" => Some(BinOp::Sub),
            "*" => Some(BinOp::Mul),
            "" => Some(BinOp::Implicit),
            _ => None,
        }
    }
}

pub const FUNCTIONS: [&str; 5] = ["sin", "cos", "tan", "log", "exp"];

pub const GREEK: [&str; 23] = [
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
    "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
    "omega",
];

/// Parsed formula. Variables carry their bare lexeme (`x`, `alpha`), numbers
/// their digits, binary operators their source symbol (empty for implicit
/// multiplication) and functions their name without the backslash.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaAst {
    pub kind: AstKind,
    pub lexeme: String,
    pub children: Vec<FormulaAst>,
}

impl FormulaAst {
    pub fn var(name: impl Into<String>) -> Self {
        Self::leaf(AstKind::Variable, name)
    }

    pub fn num(digits: impl Into<String>) -> Self {
        Self::leaf(AstKind::Number, digits)
    }

    fn leaf(kind: AstKind, lexeme: impl Into<String>) -> Self {
        FormulaAst { kind, lexeme: lexeme.into(), children: Vec::new() }
    }

    pub fn binary(op: BinOp, lhs: FormulaAst, rhs: FormulaAst) -> Self {
        FormulaAst { kind: AstKind::BinaryOp, lexeme: op.lexeme().to_string(), children: vec![lhs, rhs] }
    }

    pub fn func(name: impl Into<String>, arg: FormulaAst) -> Self {
        FormulaAst { kind: AstKind::UnaryFunc, lexeme: name.into(), children: vec![arg] }
    }

    pub fn frac(num: FormulaAst, den: FormulaAst) -> Self {
        FormulaAst { kind: AstKind::Fraction, lexeme: "frac".into(), children: vec![num, den] }
    }

    pub fn sqrt(inner: FormulaAst) -> Self {
        FormulaAst { kind: AstKind::Sqrt, lexeme: "sqrt".into(), children: vec![inner] }
    }

    pub fn group(inner: FormulaAst) -> Self {
        FormulaAst { kind: AstKind::Group, lexeme: "()".into(), children: vec![inner] }
    }

    pub fn script(base: FormulaAst, sup: Option<FormulaAst>, sub: Option<FormulaAst>) -> Self {
        let kind = AstKind::Script { sup: sup.is_some(), sub: sub.is_some() };
        let mut children = vec![base];
        children.extend(sup);
        children.extend(sub);
        FormulaAst { kind, lexeme: String::new(), children }
    }

    pub fn bin_op(&self) -> Option<BinOp> {
        match self.kind {
            AstKind::BinaryOp => BinOp::from_lexeme(&self.lexeme),
            _ => None,
        }
    }

    pub fn script_parts(&self) -> Option<(&FormulaAst, Option<&FormulaAst>, Option<&FormulaAst>)> {
        let AstKind::Script { sup, sub } = self.kind else { return None };
        let base = &self.children[0];
        let sup_node = sup.then(|| &self.children[1]);
        let sub_node = sub.then(|| &self.children[if sup { 2 } else { 1 }]);
        Some((base, sup_node, sub_node))
    }

    /// Checks the arity and lexeme invariants recursively.
    pub fn is_well_formed(&self) -> bool {
        let arity_ok = match self.kind {
            AstKind::Variable | AstKind::Number => self.children.is_empty(),
            AstKind::BinaryOp | AstKind::Fraction => self.children.len() == 2,
            AstKind::UnaryFunc | AstKind::Sqrt | AstKind::Group => self.children.len() == 1,
            AstKind::Script { sup, sub } => {
                (sup || sub) && self.children.len() == 1 + sup as usize + sub as usize
            }
        };
        let lexeme_ok = match self.kind {
            AstKind::Variable => is_variable_lexeme(&self.lexeme),
            AstKind::Number => is_number_lexeme(&self.lexeme),
            AstKind::BinaryOp => BinOp::from_lexeme(&self.lexeme).is_some(),
            AstKind::UnaryFunc => FUNCTIONS.contains(&self.lexeme.as_str()),
            _ => true,
        };
        arity_ok && lexeme_ok && self.children.iter().all(FormulaAst::is_well_formed)
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a FormulaAst)) {
        visit(self);
        for c in &self.children {
            c.walk(visit);
        }
    }

    pub fn walk_mut(&mut self, visit: &mut impl FnMut(&mut FormulaAst)) {
        visit(self);
        for c in &mut self.children {
            c.walk_mut(visit);
        }
    }
}

pub fn is_variable_lexeme(s: &str) -> bool {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => c.is_ascii_alphabetic(),
        _ => GREEK.contains(&s),
    }
}

pub fn is_number_lexeme(s: &str) -> bool {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.map_or(true, digits)
}

impl fmt::Display for FormulaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::unparse(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_lexemes() {
        assert!(is_number_lexeme("0"));
        assert!(is_number_lexeme("3.14"));
        assert!(!is_number_lexeme("3."));
        assert!(!is_number_lexeme(".5"));
        assert!(!is_number_lexeme("1.2.3"));
    }

    #[test]
    fn variable_lexemes() {
        assert!(is_variable_lexeme("x"));
        assert!(is_variable_lexeme("Q"));
        assert!(is_variable_lexeme("omega"));
        assert!(!is_variable_lexeme("xy"));
        assert!(!is_variable_lexeme("sin"));
    }

    #[test]
    fn script_slots() {
        let s = FormulaAst::script(FormulaAst::var("x"), None, Some(FormulaAst::var("i")));
        let (base, sup, sub) = s.script_parts().unwrap();
        assert_eq!(base.lexeme, "x");
        assert!(sup.is_none());
        assert_eq!(sub.unwrap().lexeme, "i");
        assert!(s.is_well_formed());
    }
}
