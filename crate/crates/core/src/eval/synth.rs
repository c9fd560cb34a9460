//! Synthetic retrieval benchmark with known relevance.
//!
//! Each base formula is a query. Its alpha-renamings (every variable and
//! number consistently replaced by a fresh one) are scored 3, near-misses
//! with one operator or function changed are scored 1, and a few formulas of
//! other families are judged 0. Everything else in the corpus is unjudged.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{
    abstract_signature, build_opt, build_slt, parse_formula, unparse, write_records, AstKind, CorpusRecord,
    FormulaAst, FormulaSampler, FUNCTIONS,
};

use super::qrels::QRels;
use super::EvalError;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub bases: usize,
    pub variants_per_base: usize,
    pub near_misses_per_base: usize,
    /// Corpus size; the remainder after variants and near-misses is filled
    /// with unrelated distractors.
    pub total: usize,
    pub max_depth: usize,
    /// Formulas of other families judged 0 per query.
    pub zero_judgments: usize,
    /// Bounds on sampled formulas, in SLT nodes.
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub max_variables: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            bases: 200,
            variants_per_base: 4,
            near_misses_per_base: 1,
            total: 1000,
            max_depth: 4,
            zero_judgments: 5,
            min_nodes: 3,
            max_nodes: 30,
            max_variables: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBenchmark {
    pub corpus: Vec<CorpusRecord>,
    pub queries: Vec<CorpusRecord>,
    pub qrels: QRels,
}

impl SyntheticBenchmark {
    /// Writes `corpus.jsonl`, `queries.jsonl` and `qrels.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), EvalError> {
        fs::create_dir_all(dir)?;
        write_records(fs::File::create(dir.join("corpus.jsonl"))?, &self.corpus)?;
        write_records(fs::File::create(dir.join("queries.jsonl"))?, &self.queries)?;
        fs::write(dir.join("qrels.txt"), self.qrels.to_text())?;
        Ok(())
    }
}

const VARIABLE_POOL: &str = "abcdefghijklmnopqrstuvwxyz";

/// Both layouts' label-free signatures; two formulas with equal keys differ
/// at most by variable and number names.
fn family_key(ast: &FormulaAst) -> String {
    format!("{}#{}", abstract_signature(&build_slt(ast)), abstract_signature(&build_opt(ast)))
}

fn lexemes(ast: &FormulaAst, kind: AstKind) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    ast.walk(&mut |n| {
        if n.kind == kind {
            out.insert(n.lexeme.clone());
        }
    });
    out
}

fn operator_count(ast: &FormulaAst) -> usize {
    let mut k = 0;
    ast.walk(&mut |n| {
        if matches!(n.kind, AstKind::BinaryOp | AstKind::UnaryFunc) {
            k += 1;
        }
    });
    k
}

/// Consistent renaming of every variable and number to fresh names.
fn alpha_rename(ast: &FormulaAst, rng: &mut impl Rng) -> FormulaAst {
    let vars = lexemes(ast, AstKind::Variable);
    let nums = lexemes(ast, AstKind::Number);
    let fresh_vars: Vec<String> =
        VARIABLE_POOL.chars().map(String::from).filter(|v| !vars.contains(v)).collect();
    let fresh_nums: Vec<String> = (0..100).map(|n| n.to_string()).filter(|n| !nums.contains(n)).collect();
    let var_map: BTreeMap<&String, &String> = vars.iter().zip(fresh_vars.choose_multiple(rng, vars.len())).collect();
    let num_map: BTreeMap<&String, &String> = nums.iter().zip(fresh_nums.choose_multiple(rng, nums.len())).collect();
    let mut out = ast.clone();
    out.walk_mut(&mut |n| match n.kind {
        AstKind::Variable => n.lexeme = var_map[&n.lexeme].clone(),
        AstKind::Number => n.lexeme = num_map[&n.lexeme].clone(),
        _ => {}
    });
    out
}

/// Changes one operator or function: `+ ↔ −`, `·` and juxtaposition become
/// `+`, a function becomes another function.
fn near_miss(ast: &FormulaAst, rng: &mut impl Rng) -> FormulaAst {
    let target = rng.gen_range(0..operator_count(ast));
    let other_function = FUNCTIONS[rng.gen_range(0..FUNCTIONS.len() - 1)];
    let mut out = ast.clone();
    let mut i = 0;
    out.walk_mut(&mut |n| {
        if !matches!(n.kind, AstKind::BinaryOp | AstKind::UnaryFunc) {
            return;
        }
        if i == target {
            n.lexeme = match (n.kind, n.lexeme.as_str()) {
                (AstKind::BinaryOp, "+") => "-".into(),
                (AstKind::BinaryOp, _) => "+".into(),
                // `other_function` skips the last name; map a collision onto it
                (_, f) if f == other_function => FUNCTIONS[FUNCTIONS.len() - 1].into(),
                _ => other_function.into(),
            };
        }
        i += 1;
    });
    out
}

fn roundtrip(ast: &FormulaAst) -> FormulaAst {
    parse_formula(&unparse(ast)).expect("unparsed formulas parse")
}

pub fn generate_synthetic_benchmark<R: Rng>(cfg: &SynthConfig, rng: &mut R) -> Result<SyntheticBenchmark, EvalError> {
    if cfg.bases == 0 || cfg.variants_per_base == 0 {
        return Err(EvalError::InvalidConfig("bases and variants per base must be at least 1".into()));
    }
    let family = cfg.variants_per_base + cfg.near_misses_per_base;
    let distractors = cfg
        .total
        .checked_sub(cfg.bases * family)
        .ok_or_else(|| EvalError::InvalidConfig(format!("total {} is below bases × (variants + near-misses)", cfg.total)))?;
    if cfg.max_variables > VARIABLE_POOL.len() / 2 {
        return Err(EvalError::InvalidConfig("max_variables leaves no fresh names for renaming".into()));
    }
    let sampler = FormulaSampler::with_depth(cfg.max_depth);
    let acceptable = |ast: &FormulaAst| {
        let n = build_slt(ast).node_count();
        (cfg.min_nodes..=cfg.max_nodes).contains(&n)
            && (1..=cfg.max_variables).contains(&lexemes(ast, AstKind::Variable).len())
            && lexemes(ast, AstKind::Number).len() <= 10
    };
    let draw = |rng: &mut R| -> FormulaAst {
        loop {
            let ast = parse_formula(&sampler.sample(rng)).expect("sampled formulas parse");
            if acceptable(&ast) {
                return ast;
            }
        }
    };

    // families: base, its renamings and near-misses, all pairwise distinct
    // and distinct from every other family
    let mut taken: HashSet<String> = HashSet::new();
    let mut families = Vec::with_capacity(cfg.bases);
    let mut attempts = 0usize;
    while families.len() < cfg.bases {
        attempts += 1;
        if attempts > 1000 * cfg.bases + 10_000 {
            return Err(EvalError::InvalidConfig("could not sample enough distinct base formulas".into()));
        }
        let base = draw(rng);
        if operator_count(&base) == 0 || taken.contains(&family_key(&base)) {
            continue;
        }
        let misses: Vec<FormulaAst> = (0..cfg.near_misses_per_base).map(|_| roundtrip(&near_miss(&base, rng))).collect();
        let keys: Vec<String> = misses.iter().map(family_key).collect();
        let base_key = family_key(&base);
        let distinct: HashSet<&String> = keys.iter().chain([&base_key]).collect();
        if distinct.len() != keys.len() + 1 || keys.iter().any(|k| taken.contains(k)) {
            continue;
        }
        let mut seen_text: HashSet<String> = HashSet::from([unparse(&base)]);
        let mut variants = Vec::with_capacity(cfg.variants_per_base);
        let mut tries = 0;
        while variants.len() < cfg.variants_per_base && tries < 100 {
            tries += 1;
            let v = roundtrip(&alpha_rename(&base, rng));
            if seen_text.insert(unparse(&v)) {
                variants.push(v);
            }
        }
        if variants.len() < cfg.variants_per_base {
            continue;
        }
        taken.insert(base_key);
        taken.extend(keys);
        families.push((base, variants, misses));
    }
    let mut others = Vec::with_capacity(distractors);
    while others.len() < distractors {
        let d = draw(rng);
        let key = family_key(&d);
        if taken.insert(key) {
            others.push(d);
        }
    }

    // (formula, owning family, score) before shuffling
    let mut pool: Vec<(FormulaAst, Option<usize>, u8)> = Vec::with_capacity(cfg.total);
    for (f, (_, variants, misses)) in families.iter().enumerate() {
        pool.extend(variants.iter().map(|v| (v.clone(), Some(f), 3)));
        pool.extend(misses.iter().map(|m| (m.clone(), Some(f), 1)));
    }
    pool.extend(others.into_iter().map(|d| (d, None, 0)));
    pool.shuffle(rng);

    let width = cfg.total.max(1).to_string().len();
    let doc_id = |i: usize| format!("f{:0width$}", i + 1);
    let qwidth = cfg.bases.to_string().len();
    let query_id = |f: usize| format!("q{:0qwidth$}", f + 1);
    let corpus: Vec<CorpusRecord> =
        pool.iter().enumerate().map(|(i, (ast, _, _))| CorpusRecord { id: doc_id(i), latex: unparse(ast) }).collect();
    let queries: Vec<CorpusRecord> = families
        .iter()
        .enumerate()
        .map(|(f, (base, _, _))| CorpusRecord { id: query_id(f), latex: unparse(base) })
        .collect();

    let mut qrels = QRels::new();
    for f in 0..families.len() {
        let q = query_id(f);
        for (i, (_, owner, score)) in pool.iter().enumerate() {
            if *owner == Some(f) {
                qrels.insert(&q, &doc_id(i), *score)?;
            }
        }
        let outsiders: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].1 != Some(f)).collect();
        for &i in outsiders.choose_multiple(rng, cfg.zero_judgments.min(outsiders.len())) {
            qrels.insert(&q, &doc_id(i), 0)?;
        }
    }
    Ok(SyntheticBenchmark { corpus, queries, qrels })
}
