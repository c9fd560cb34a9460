//! The experiment grid: layouts × methods × batch sizes × seeds, each cell
//! trained, indexed and scored under both relevance settings.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::augment::Strategy;
use crate::embed::{fnv1a32, train_token_table, EmbeddingTable, TokenConfig};
use crate::encoder::{train_gcl, Checkpoint, TrainConfig};
use crate::formula::{build_graph, FormulaAst, Layout, MathGraph};
use crate::index::{build_index, FormulaEmbedder, RankedList};

use super::bpref::evaluate;
use super::qrels::{binarize, Judgments, QRels, RelevanceSetting};
use super::EvalError;

/// A trained augmentation strategy, or the untrained mean-embedding baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Augmented(Strategy),
    Baseline,
}

impl Method {
    /// The methods of the full grid, in display order.
    pub const ALL: [Method; 7] = [
        Method::Augmented(Strategy::VarSub),
        Method::Augmented(Strategy::NodeDrop),
        Method::Augmented(Strategy::EdgeDrop),
        Method::Augmented(Strategy::NodeFeatureMask),
        Method::Augmented(Strategy::EdgeFeatureMask),
        Method::Augmented(Strategy::Random),
        Method::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Augmented(s) => s.name(),
            Method::Baseline => "Baseline",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        if s.eq_ignore_ascii_case("baseline") {
            Some(Method::Baseline)
        } else {
            Strategy::parse(s).map(Method::Augmented)
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub layouts: Vec<Layout>,
    pub methods: Vec<Method>,
    pub batch_sizes: Vec<usize>,
    /// Number of seeds per cell.
    pub seeds: usize,
    /// Grid seed; every cell seed derives from it and the cell coordinates.
    pub seed: u64,
    /// Shared training settings; batch size, augmentation strategy and seed
    /// are set per cell.
    pub train: TrainConfig,
    pub tokens: TokenConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            layouts: vec![Layout::Slt, Layout::Opt],
            methods: Method::ALL.to_vec(),
            batch_sizes: vec![16, 32, 64, 128],
            seeds: 5,
            seed: 0,
            train: TrainConfig::default(),
            tokens: TokenConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.layouts.is_empty() || self.methods.is_empty() || self.batch_sizes.is_empty() || self.seeds == 0 {
            return Err(EvalError::InvalidConfig("grid axes must be non-empty and seeds ≥ 1".into()));
        }
        Ok(())
    }
}

/// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(grid_seed: u64, parts: &[&str]) -> u64 {
    parts.iter().fold(mix(grid_seed), |acc, p| mix(acc ^ fnv1a32(p.as_bytes()) as u64))
}

/// Seed of one grid cell, a function of the grid seed and the coordinates only.
pub fn cell_seed(grid_seed: u64, layout: Layout, method: Method, batch_size: usize, seed_index: usize) -> u64 {
    derive_seed(
        grid_seed,
        &[layout.as_str(), method.name(), &batch_size.to_string(), &seed_index.to_string()],
    )
}

fn token_seed(grid_seed: u64, layout: Layout) -> u64 {
    derive_seed(grid_seed, &["tokens", layout.as_str()])
}

/// One grid cell with its derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSpec {
    pub layout: Layout,
    pub method: Method,
    pub batch_size: usize,
    pub seed: u64,
}

impl fmt::Display for CellSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/batch {}/seed {}", self.layout, self.method, self.batch_size, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub layout: Layout,
    pub setting: RelevanceSetting,
    pub method: Method,
    pub batch_size: usize,
    pub seed: u64,
    pub bpref: f64,
}

/// Mean and sample standard deviation of one cell across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub layout: Layout,
    pub setting: RelevanceSetting,
    pub method: Method,
    pub batch_size: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

/// The token table shared by every cell of one layout.
pub fn layout_table(grid: &GridConfig, corpus: &[(String, FormulaAst)], layout: Layout) -> Result<EmbeddingTable, EvalError> {
    let graphs: Vec<MathGraph> = corpus.iter().map(|(_, ast)| build_graph(ast, layout)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(token_seed(grid.seed, layout));
    Ok(train_token_table(&graphs, &grid.tokens, &mut rng)?.0)
}

/// Trains (unless baseline), indexes the corpus, ranks every query and
/// returns `(full, partial)` mean bpref.
pub fn run_cell(
    spec: &CellSpec,
    train: &TrainConfig,
    table: &EmbeddingTable,
    corpus: &[(String, FormulaAst)],
    queries: &[(String, FormulaAst)],
    judgments: &BTreeMap<RelevanceSetting, BTreeMap<String, Judgments>>,
) -> Result<(f64, f64), EvalError> {
    let checkpoint;
    let embedder = match spec.method {
        Method::Baseline => FormulaEmbedder::baseline(table, spec.layout),
        Method::Augmented(strategy) => {
            let mut cfg = train.clone();
            cfg.batch_size = spec.batch_size;
            cfg.seed = spec.seed;
            cfg.augment.strategy = strategy;
            let graphs: Vec<MathGraph> = corpus.iter().map(|(_, ast)| build_graph(ast, spec.layout)).collect();
            let (params, history) = train_gcl(&graphs, table, &cfg, &mut ChaCha8Rng::seed_from_u64(spec.seed))?;
            checkpoint = Checkpoint { params, config: cfg, history };
            FormulaEmbedder::trained(table, &checkpoint.params, &checkpoint.id(), spec.layout)
        }
    };
    let index = build_index(corpus, &embedder)?;
    let query_vectors = embedder.embed_all(queries)?;
    let rankings = queries
        .iter()
        .zip(&query_vectors)
        .map(|((qid, _), v)| index.search(qid, v, index.len()))
        .collect::<Result<Vec<RankedList>, _>>()?;
    let score = |s: RelevanceSetting| evaluate(&rankings, &judgments[&s]).mean;
    Ok((score(RelevanceSetting::Full), score(RelevanceSetting::Partial)))
}

/// Runs every cell of the grid. Cells are independent and run in parallel;
/// rows come back in grid order regardless of scheduling.
pub fn run_experiment(
    grid: &GridConfig,
    corpus: &[(String, FormulaAst)],
    queries: &[(String, FormulaAst)],
    qrels: &QRels,
) -> Result<(Vec<ResultRow>, Vec<CellStats>), EvalError> {
    grid.validate()?;
    let judgments: BTreeMap<_, _> = RelevanceSetting::ALL.iter().map(|&s| (s, binarize(qrels, s))).collect();
    let tables = grid
        .layouts
        .iter()
        .map(|&layout| layout_table(grid, corpus, layout).map(|t| (layout, t)))
        .collect::<Result<BTreeMap<_, _>, _>>()?;

    let mut specs = Vec::new();
    for &layout in &grid.layouts {
        for &method in &grid.methods {
            for &batch_size in &grid.batch_sizes {
                for s in 0..grid.seeds {
                    specs.push(CellSpec { layout, method, batch_size, seed: cell_seed(grid.seed, layout, method, batch_size, s) });
                }
            }
        }
    }
    // the baseline ignores batch size and seed; score it once per layout
    let mut baseline: BTreeMap<Layout, (f64, f64)> = BTreeMap::new();
    for &layout in &grid.layouts {
        if grid.methods.contains(&Method::Baseline) {
            let spec = CellSpec { layout, method: Method::Baseline, batch_size: 0, seed: 0 };
            let r = run_cell(&spec, &grid.train, &tables[&layout], corpus, queries, &judgments)
                .map_err(|e| EvalError::Cell { cell: spec.to_string(), source: Box::new(e) })?;
            baseline.insert(layout, r);
        }
    }
    let scores = specs
        .par_iter()
        .map(|spec| match spec.method {
            Method::Baseline => Ok(baseline[&spec.layout]),
            _ => run_cell(spec, &grid.train, &tables[&spec.layout], corpus, queries, &judgments)
                .map_err(|e| EvalError::Cell { cell: spec.to_string(), source: Box::new(e) }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::with_capacity(specs.len() * 2);
    for (spec, (full, partial)) in specs.iter().zip(scores) {
        for (setting, bpref) in [(RelevanceSetting::Full, full), (RelevanceSetting::Partial, partial)] {
            rows.push(ResultRow {
                layout: spec.layout,
                setting,
                method: spec.method,
                batch_size: spec.batch_size,
                seed: spec.seed,
                bpref,
            });
        }
    }
    let stats = cell_stats(&rows);
    Ok((rows, stats))
}

/// Groups rows by `(layout, setting, method, batch size)`; the standard
/// deviation uses the `n − 1` denominator and is 0 for a single seed.
pub fn cell_stats(rows: &[ResultRow]) -> Vec<CellStats> {
    let mut groups: BTreeMap<(Layout, RelevanceSetting, Method, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.layout, r.setting, r.method, r.batch_size)).or_default().push(r.bpref);
    }
    groups
        .into_iter()
        .map(|((layout, setting, method, batch_size), xs)| {
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let std = if n < 2 {
                0.0
            } else {
                (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            CellStats { layout, setting, method, batch_size, mean, std, count: n }
        })
        .collect()
}

pub const RESULTS_HEADER: &str = "layout,setting,augmentation,batch_size,seed,bpref";

pub fn format_results_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.layout, r.setting.name(), r.method, r.batch_size, r.seed, r.bpref)
            .expect("formatting into a string");
    }
    out
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>, EvalError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => return Err(EvalError::MalformedResults { line: 1, message: format!("expected header `{RESULTS_HEADER}`") }),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let bad = |m: &str| EvalError::MalformedResults { line: i + 1, message: m.to_string() };
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            Ok(ResultRow {
                layout: Layout::parse(f[0]).ok_or_else(|| bad("unknown layout"))?,
                setting: RelevanceSetting::parse(f[1]).ok_or_else(|| bad("unknown setting"))?,
                method: Method::parse(f[2]).ok_or_else(|| bad("unknown augmentation"))?,
                batch_size: f[3].parse().map_err(|_| bad("bad batch size"))?,
                seed: f[4].parse().map_err(|_| bad("bad seed"))?,
                bpref: f[5].parse().map_err(|_| bad("bad bpref"))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::SkipGramConfig;
    use crate::eval::synth::{generate_synthetic_benchmark, SynthConfig};
    use crate::formula::parse_formula;

    #[test]
    fn cell_seeds_depend_on_coordinates_only() {
        let a = cell_seed(7, Layout::Slt, Method::Baseline, 16, 0);
        assert_eq!(a, cell_seed(7, Layout::Slt, Method::Baseline, 16, 0));
        assert_ne!(a, cell_seed(7, Layout::Opt, Method::Baseline, 16, 0));
        assert_ne!(a, cell_seed(7, Layout::Slt, Method::Baseline, 32, 0));
        assert_ne!(a, cell_seed(7, Layout::Slt, Method::Baseline, 16, 1));
        assert_ne!(a, cell_seed(8, Layout::Slt, Method::Baseline, 16, 0));
    }

    #[test]
    fn sample_std() {
        let row = |bpref| ResultRow {
            layout: Layout::Slt,
            setting: RelevanceSetting::Full,
            method: Method::Baseline,
            batch_size: 16,
            seed: 0,
            bpref,
        };
        let s = cell_stats(&[row(1.0), row(2.0), row(3.0)]);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].mean, 2.0);
        assert_eq!(s[0].std, 1.0);
    }

    fn tiny_grid() -> GridConfig {
        GridConfig {
            methods: vec![Method::Augmented(Strategy::VarSub), Method::Augmented(Strategy::NodeDrop), Method::Baseline],
            batch_sizes: vec![4, 8],
            seeds: 1,
            seed: 3,
            train: TrainConfig { epochs: 1, hidden: vec![8], edge_dim: 4, ..Default::default() },
            tokens: TokenConfig {
                skipgram: SkipGramConfig { dim: 8, epochs: 1, buckets: 256, ..Default::default() },
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn parsed(records: &[crate::formula::CorpusRecord]) -> Vec<(String, FormulaAst)> {
        records.iter().map(|r| (r.id.clone(), parse_formula(&r.latex).unwrap())).collect()
    }

    #[test]
    fn small_grid_counts_and_determinism() {
        let cfg = SynthConfig { bases: 4, total: 30, ..Default::default() };
        let bench = generate_synthetic_benchmark(&cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let (corpus, queries) = (parsed(&bench.corpus), parsed(&bench.queries));
        let grid = tiny_grid();
        let (rows, stats) = run_experiment(&grid, &corpus, &queries, &bench.qrels).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2 * 2);
        assert_eq!(stats.len(), 2 * 3 * 2 * 2);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.bpref)));
        let baseline: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == Method::Baseline && r.layout == Layout::Opt && r.setting == RelevanceSetting::Full)
            .map(|r| r.bpref)
            .collect();
        assert_eq!(baseline.len(), 2);
        assert_eq!(baseline[0], baseline[1]);

        let csv = format_results_csv(&rows);
        assert_eq!(parse_results_csv(&csv).unwrap(), rows);
        let (again, _) = run_experiment(&grid, &corpus, &queries, &bench.qrels).unwrap();
        assert_eq!(format_results_csv(&again), csv);
    }
}
