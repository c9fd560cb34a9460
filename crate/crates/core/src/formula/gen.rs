//! Random derivations of the formula grammar.

use rand::seq::SliceRandom;
use rand::Rng;

use super::ast::{FUNCTIONS, GREEK};

/// Samples formula text by expanding the grammar top-down. Every produced
/// string parses; `max_depth` bounds the nesting of sub-expressions.
#[derive(Debug, Clone)]
pub struct FormulaSampler {
    pub max_depth: usize,
    /// Probability that a Latin variable is replaced by a Greek one.
    pub greek_prob: f64,
    /// Probability that a base expands to something other than an atom.
    pub compound_prob: f64,
    pub script_prob: f64,
}

impl Default for FormulaSampler {
    fn default() -> Self {
        FormulaSampler { max_depth: 4, greek_prob: 0.05, compound_prob: 0.3, script_prob: 0.2 }
    }
}

impl FormulaSampler {
    pub fn with_depth(max_depth: usize) -> Self {
        FormulaSampler { max_depth, ..Default::default() }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> String {
        let mut out = String::new();
        self.expr(self.max_depth, rng, &mut out);
        out
    }

    fn expr(&self, depth: usize, rng: &mut impl Rng, out: &mut String) {
        // nested expressions are kept short so sizes stay formula-like
        let top = depth == self.max_depth;
        let terms = 1 + (rng.gen_bool(if top { 0.6 } else { 0.3 }) as usize) + (top && rng.gen_bool(0.2)) as usize;
        for i in 0..terms {
            if i > 0 {
                out.push(if rng.gen_bool(0.6) { '+' } else { '-' });
            }
            self.term(depth, rng, out);
        }
    }

    fn term(&self, depth: usize, rng: &mut impl Rng, out: &mut String) {
        let factors = 1 + (rng.gen_bool(0.3) as usize);
        for i in 0..factors {
            if i > 0 {
                out.push_str(if rng.gen_bool(0.3) { "*" } else { " " });
            }
            self.factor(depth, rng, out);
        }
    }

    fn factor(&self, depth: usize, rng: &mut impl Rng, out: &mut String) {
        self.base(depth, rng, out);
        if depth > 0 && rng.gen_bool(self.script_prob) {
            out.push_str("^{");
            self.expr(depth - 1, rng, out);
            out.push('}');
        }
        if rng.gen_bool(self.script_prob * 0.4) {
            out.push_str("_{");
            self.atom(rng, out);
            out.push('}');
        }
    }

    fn base(&self, depth: usize, rng: &mut impl Rng, out: &mut String) {
        if depth == 0 || !rng.gen_bool(self.compound_prob) {
            self.atom(rng, out);
            return;
        }
        match rng.gen_range(0..4) {
            0 => {
                out.push('(');
                self.expr(depth - 1, rng, out);
                out.push(')');
            }
            1 => {
                out.push_str("\\frac{");
                self.expr(depth - 1, rng, out);
                out.push_str("}{");
                self.expr(depth - 1, rng, out);
                out.push('}');
            }
            2 => {
                out.push_str("\\sqrt{");
                self.expr(depth - 1, rng, out);
                out.push('}');
            }
            _ => {
                out.push('\\');
                out.push_str(FUNCTIONS.choose(rng).expect("non-empty"));
                out.push('(');
                self.expr(depth - 1, rng, out);
                out.push(')');
            }
        }
    }

    fn atom(&self, rng: &mut impl Rng, out: &mut String) {
        // a trailing space keeps juxtaposed atoms (`x y`, `2 3`) separate tokens
        if rng.gen_bool(0.7) {
            if rng.gen_bool(self.greek_prob) {
                out.push('\\');
                out.push_str(GREEK.choose(rng).expect("non-empty"));
                out.push(' ');
            } else {
                let c = if rng.gen_bool(0.9) { rng.gen_range(b'a'..=b'z') } else { rng.gen_range(b'A'..=b'Z') };
                out.push(c as char);
            }
        } else {
            out.push_str(&rng.gen_range(0..10).to_string());
            if rng.gen_bool(0.1) {
                out.push_str(&rng.gen_range(0..10).to_string());
            }
            out.push(' ');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_always_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for depth in 0..=6 {
            let s = FormulaSampler::with_depth(depth);
            for _ in 0..200 {
                let text = s.sample(&mut rng);
                assert!(parse_formula(&text).is_ok(), "{text}");
            }
        }
    }
}
