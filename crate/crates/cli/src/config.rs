//! The experiment config: a flat `key = value` file, every key overridable
//! from the command line with `--key=value`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use formula_gcl::augment::{Strategy, SubstitutionMode};
use formula_gcl::embed::TokenConfig;
use formula_gcl::encoder::TrainConfig;
use formula_gcl::eval::{GridConfig, Method, SynthConfig};
use formula_gcl::formula::Layout;

use crate::error::CliError;

/// Which embedder `index` and `query` use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Gcl,
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub work_dir: PathBuf,
    pub table: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub layout: Layout,
    pub model: Model,
    pub seed: u64,
    pub tokens: TokenConfig,
    /// Training settings; the grid uses them for every cell, overriding
    /// batch size, strategy and seed.
    pub train: TrainConfig,
    pub grid: GridConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            queries: None,
            qrels: None,
            work_dir: PathBuf::from("work"),
            table: None,
            checkpoint: None,
            index: None,
            layout: Layout::Slt,
            model: Model::Gcl,
            seed: 0,
            tokens: TokenConfig::default(),
            train: TrainConfig::default(),
            grid: GridConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "corpus",
    "queries",
    "qrels",
    "work_dir",
    "table",
    "checkpoint",
    "index",
    "layout",
    "model",
    "seed",
    "walks_per_node",
    "walk_length",
    "min_count",
    "token_dim",
    "window",
    "negatives",
    "token_epochs",
    "token_lr",
    "n_min",
    "n_max",
    "buckets",
    "power",
    "batch_size",
    "tau",
    "epochs",
    "lr",
    "clip_norm",
    "hidden",
    "edge_dim",
    "strategy",
    "ratio",
    "var_pool",
    "num_pool",
    "substitution_mode",
    "grid_layouts",
    "grid_methods",
    "grid_batch_sizes",
    "grid_seeds",
    "bases",
    "variants_per_base",
    "near_misses_per_base",
    "total",
    "max_depth",
    "zero_judgments",
    "min_nodes",
    "max_nodes",
    "max_variables",
];

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn path_text(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl RunConfig {
    /// Reads a config file; `#` starts a comment line.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("config {}", path.display()), e))?;
        let mut cfg = RunConfig::default();
        cfg.apply_text(&text).map_err(|m| CliError::invalid(format!("{}: {m}", path.display())))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
            self.set(k.trim(), v.trim()).map_err(|m| format!("line {}: {m}", i + 1))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| format!("{key}: {e}"))
        }
        let path = |v: &str| if v.is_empty() { None } else { Some(PathBuf::from(v)) };
        let sg = &mut self.tokens.skipgram;
        match key {
            "corpus" => self.corpus = path(value),
            "queries" => self.queries = path(value),
            "qrels" => self.qrels = path(value),
            "work_dir" => self.work_dir = PathBuf::from(value),
            "table" => self.table = path(value),
            "checkpoint" => self.checkpoint = path(value),
            "index" => self.index = path(value),
            "layout" => self.layout = Layout::parse(value).ok_or_else(|| format!("layout: unknown `{value}`"))?,
            "model" => {
                self.model = match value.to_ascii_lowercase().as_str() {
                    "gcl" => Model::Gcl,
                    "baseline" => Model::Baseline,
                    _ => return Err(format!("model: expected gcl or baseline, got `{value}`")),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "walks_per_node" => self.tokens.walks_per_node = num(key, value)?,
            "walk_length" => self.tokens.walk_length = num(key, value)?,
            "min_count" => self.tokens.min_count = num(key, value)?,
            "token_dim" => sg.dim = num(key, value)?,
            "window" => sg.window = num(key, value)?,
            "negatives" => sg.negatives = num(key, value)?,
            "token_epochs" => sg.epochs = num(key, value)?,
            "token_lr" => sg.lr = num(key, value)?,
            "n_min" => sg.n_min = num(key, value)?,
            "n_max" => sg.n_max = num(key, value)?,
            "buckets" => sg.buckets = num(key, value)?,
            "power" => sg.power = num(key, value)?,
            "batch_size" => self.train.batch_size = num(key, value)?,
            "tau" => self.train.tau = num(key, value)?,
            "epochs" => self.train.epochs = num(key, value)?,
            "lr" => self.train.lr = num(key, value)?,
            "clip_norm" => self.train.clip_norm = num(key, value)?,
            "hidden" => self.train.hidden = list(value).iter().map(|s| num(key, s)).collect::<Result<_, _>>()?,
            "edge_dim" => self.train.edge_dim = num(key, value)?,
            "strategy" => {
                self.train.augment.strategy =
                    Strategy::parse(value).ok_or_else(|| format!("strategy: unknown `{value}`"))?
            }
            "ratio" => self.train.augment.ratio = num(key, value)?,
            "var_pool" => self.train.augment.var_pool = list(value),
            "num_pool" => self.train.augment.num_pool = list(value),
            "substitution_mode" => {
                self.train.augment.mode =
                    SubstitutionMode::parse(value).ok_or_else(|| format!("substitution_mode: unknown `{value}`"))?
            }
            "grid_layouts" => {
                self.grid.layouts = list(value)
                    .iter()
                    .map(|s| Layout::parse(s).ok_or_else(|| format!("grid_layouts: unknown `{s}`")))
                    .collect::<Result<_, _>>()?
            }
            "grid_methods" => {
                self.grid.methods = list(value)
                    .iter()
                    .map(|s| Method::parse(s).ok_or_else(|| format!("grid_methods: unknown `{s}`")))
                    .collect::<Result<_, _>>()?
            }
            "grid_batch_sizes" => {
                self.grid.batch_sizes = list(value).iter().map(|s| num(key, s)).collect::<Result<_, _>>()?
            }
            "grid_seeds" => self.grid.seeds = num(key, value)?,
            "bases" => self.synth.bases = num(key, value)?,
            "variants_per_base" => self.synth.variants_per_base = num(key, value)?,
            "near_misses_per_base" => self.synth.near_misses_per_base = num(key, value)?,
            "total" => self.synth.total = num(key, value)?,
            "max_depth" => self.synth.max_depth = num(key, value)?,
            "zero_judgments" => self.synth.zero_judgments = num(key, value)?,
            "min_nodes" => self.synth.min_nodes = num(key, value)?,
            "max_nodes" => self.synth.max_nodes = num(key, value)?,
            "max_variables" => self.synth.max_variables = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Every key with its effective value, in [`KEYS`] order. Written next
    /// to artifacts so their seed and settings are on record.
    pub fn to_text(&self) -> String {
        let sg = &self.tokens.skipgram;
        let a = &self.train.augment;
        let values = [
            path_text(&self.corpus),
            path_text(&self.queries),
            path_text(&self.qrels),
            self.work_dir.display().to_string(),
            path_text(&self.table),
            path_text(&self.checkpoint),
            path_text(&self.index),
            self.layout.to_string(),
            match self.model {
                Model::Gcl => "gcl".into(),
                Model::Baseline => "baseline".into(),
            },
            self.seed.to_string(),
            self.tokens.walks_per_node.to_string(),
            self.tokens.walk_length.to_string(),
            self.tokens.min_count.to_string(),
            sg.dim.to_string(),
            sg.window.to_string(),
            sg.negatives.to_string(),
            sg.epochs.to_string(),
            sg.lr.to_string(),
            sg.n_min.to_string(),
            sg.n_max.to_string(),
            sg.buckets.to_string(),
            sg.power.to_string(),
            self.train.batch_size.to_string(),
            self.train.tau.to_string(),
            self.train.epochs.to_string(),
            self.train.lr.to_string(),
            self.train.clip_norm.to_string(),
            join(&self.train.hidden),
            self.train.edge_dim.to_string(),
            a.strategy.to_string(),
            a.ratio.to_string(),
            a.var_pool.join(","),
            a.num_pool.join(","),
            a.mode.name().to_string(),
            join(&self.grid.layouts),
            join(&self.grid.methods),
            join(&self.grid.batch_sizes),
            self.grid.seeds.to_string(),
            self.synth.bases.to_string(),
            self.synth.variants_per_base.to_string(),
            self.synth.near_misses_per_base.to_string(),
            self.synth.total.to_string(),
            self.synth.max_depth.to_string(),
            self.synth.zero_judgments.to_string(),
            self.synth.min_nodes.to_string(),
            self.synth.max_nodes.to_string(),
            self.synth.max_variables.to_string(),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            writeln!(out, "{k} = {v}").expect("formatting into a string");
        }
        out
    }

    fn in_work_dir(&self, p: &Option<PathBuf>, default: String) -> PathBuf {
        p.clone().unwrap_or_else(|| self.work_dir.join(default))
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.in_work_dir(&self.corpus, "corpus.jsonl".into())
    }

    pub fn queries_path(&self) -> PathBuf {
        self.in_work_dir(&self.queries, "queries.jsonl".into())
    }

    pub fn qrels_path(&self) -> PathBuf {
        self.in_work_dir(&self.qrels, "qrels.txt".into())
    }

    pub fn table_path(&self) -> PathBuf {
        self.in_work_dir(&self.table, format!("tokens-{}.bin", self.layout))
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.in_work_dir(&self.checkpoint, format!("gcl-{}.ckpt", self.layout))
    }

    pub fn index_path(&self) -> PathBuf {
        let model = match self.model {
            Model::Gcl => "gcl",
            Model::Baseline => "baseline",
        };
        self.in_work_dir(&self.index, format!("index-{}-{model}.bin", self.layout))
    }

    /// The grid as configured, with the shared token and training settings
    /// and the global seed filled in.
    pub fn grid_config(&self) -> GridConfig {
        GridConfig { seed: self.seed, train: self.train.clone(), tokens: self.tokens.clone(), ..self.grid.clone() }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }
}
