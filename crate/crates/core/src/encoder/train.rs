use rand::seq::SliceRandom;
use rand::Rng;

use crate::augment::{augment, AugmentConfig, Strategy, SubstitutionMode};
use crate::embed::{EmbeddingTable, FeaturedGraph, Featurizer};
use crate::formula::MathGraph;

use super::params::EncoderParams;
use super::{loss_gradients, EncoderError};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub tau: f64,
    pub epochs: usize,
    /// Fixed SGD step.
    pub lr: f64,
    /// Global gradient-norm cap; 0 disables clipping. Near-dead readouts
    /// produce occasional gradient spikes that otherwise collapse training.
    pub clip_norm: f64,
    /// Recorded in checkpoints; training itself draws from the caller's rng.
    pub seed: u64,
    /// Widths of the hidden layers; the input width is the table dimension.
    pub hidden: Vec<usize>,
    pub edge_dim: usize,
    pub augment: AugmentConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            tau: 0.5,
            epochs: 10,
            lr: 0.05,
            clip_norm: 0.2,
            seed: 0,
            hidden: vec![128, 128],
            edge_dim: 16,
            augment: AugmentConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.batch_size < 2 {
            return Err(EncoderError::BatchTooSmall(self.batch_size));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(EncoderError::InvalidConfig(format!("temperature must be positive, got {}", self.tau)));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(EncoderError::InvalidConfig(format!("learning rate must be non-negative, got {}", self.lr)));
        }
        if !(self.clip_norm >= 0.0 && self.clip_norm.is_finite()) {
            return Err(EncoderError::InvalidConfig(format!("clip_norm must be non-negative, got {}", self.clip_norm)));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(EncoderError::InvalidConfig("hidden widths must be non-empty and positive".into()));
        }
        self.augment.validate()?;
        Ok(())
    }

    /// `key = value` lines, one per field, in a fixed order.
    pub fn to_text(&self) -> String {
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        [
            ("batch_size", self.batch_size.to_string()),
            ("tau", self.tau.to_string()),
            ("epochs", self.epochs.to_string()),
            ("lr", self.lr.to_string()),
            ("clip_norm", self.clip_norm.to_string()),
            ("seed", self.seed.to_string()),
            ("hidden", hidden.join(",")),
            ("edge_dim", self.edge_dim.to_string()),
            ("augmentation", self.augment.strategy.name().to_string()),
            ("ratio", self.augment.ratio.to_string()),
            ("substitution", self.augment.mode.name().to_string()),
            ("var_pool", self.augment.var_pool.join(",")),
            ("num_pool", self.augment.num_pool.join(",")),
        ]
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
    }

    /// Inverse of [`TrainConfig::to_text`]; unknown keys are rejected.
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut cfg = TrainConfig::default();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| format!("not a key = value line: {line}"))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |e: &dyn std::fmt::Display| format!("{k}: {e}");
            let list = |v: &str| -> Vec<String> {
                if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| s.trim().to_string()).collect()
                }
            };
            match k {
                "batch_size" => cfg.batch_size = v.parse().map_err(|e| bad(&e))?,
                "tau" => cfg.tau = v.parse().map_err(|e| bad(&e))?,
                "epochs" => cfg.epochs = v.parse().map_err(|e| bad(&e))?,
                "lr" => cfg.lr = v.parse().map_err(|e| bad(&e))?,
                "clip_norm" => cfg.clip_norm = v.parse().map_err(|e| bad(&e))?,
                "seed" => cfg.seed = v.parse().map_err(|e| bad(&e))?,
                "hidden" => {
                    cfg.hidden = list(v).iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(|e| bad(&e))?
                }
                "edge_dim" => cfg.edge_dim = v.parse().map_err(|e| bad(&e))?,
                "augmentation" => cfg.augment.strategy = Strategy::parse(v).ok_or_else(|| bad(&"unknown strategy"))?,
                "ratio" => cfg.augment.ratio = v.parse().map_err(|e| bad(&e))?,
                "substitution" => cfg.augment.mode = SubstitutionMode::parse(v).ok_or_else(|| bad(&"unknown mode"))?,
                "var_pool" => cfg.augment.var_pool = list(v),
                "num_pool" => cfg.augment.num_pool = list(v),
                _ => return Err(format!("unknown key `{k}`")),
            }
        }
        Ok(cfg)
    }
}

/// Contrastive training over `(original, augmented)` views.
///
/// Each epoch shuffles the corpus, cuts it into batches of `batch_size`
/// (dropping the short tail) and takes one SGD step per batch. Returns the
/// final parameters, rounded to `f32`, and the mean batch loss per epoch.
pub fn train_gcl(
    graphs: &[MathGraph],
    table: &EmbeddingTable,
    cfg: &TrainConfig,
    rng: &mut impl Rng,
) -> Result<(EncoderParams, Vec<f64>), EncoderError> {
    cfg.validate()?;
    if graphs.len() < cfg.batch_size {
        return Err(EncoderError::CorpusTooSmall { needed: cfg.batch_size, available: graphs.len() });
    }
    if cfg.edge_dim > table.dim {
        return Err(EncoderError::InvalidConfig(format!(
            "edge_dim {} exceeds the embedding width {}",
            cfg.edge_dim, table.dim
        )));
    }
    let mut dims = vec![table.dim];
    dims.extend(&cfg.hidden);
    let mut params = EncoderParams::initialize(&dims, cfg.edge_dim, rng);

    let mut featurizer = Featurizer::new(table, cfg.edge_dim);
    let originals: Vec<FeaturedGraph> = graphs.iter().map(|g| featurizer.featurize(g)).collect();
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        let mut steps = 0;
        for chunk in order.chunks_exact(cfg.batch_size) {
            let view_a: Vec<FeaturedGraph> = chunk.iter().map(|&i| originals[i].clone()).collect();
            let view_b = view_a
                .iter()
                .map(|fg| augment(fg, &cfg.augment, &mut featurizer, rng))
                .collect::<Result<Vec<_>, _>>()?;
            let (loss, grads) = loss_gradients(&params, &view_a, &view_b, cfg.tau)?;
            let g = grads.norm();
            let scale = if cfg.clip_norm > 0.0 && g > cfg.clip_norm { cfg.clip_norm / g } else { 1.0 };
            params.add_scaled(-cfg.lr * scale, &grads);
            total += loss;
            steps += 1;
        }
        history.push(total / steps as f64);
    }
    params.round_to_f32();
    Ok((params, history))
}
