//! Skip-gram with negative sampling over walk token sequences, with subword
//! bucket vectors added to each center token.

use rand::seq::SliceRandom;
use rand::Rng;

use super::table::EmbeddingTable;
use super::vocab::{unigram_distribution, Vocabulary};
use super::walks::Walk;

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to zero over training.
    pub lr: f64,
    pub n_min: usize,
    pub n_max: usize,
    pub buckets: usize,
    pub power: f64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 100,
            window: 2,
            negatives: 5,
            epochs: 5,
            lr: 0.05,
            n_min: 3,
            n_max: 5,
            buckets: 1 << 14,
            power: 0.75,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-log σ(x)`, computed without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Loss and gradient coefficient of one logistic term. `label` is 1 for the
/// true context and 0 for a negative; the gradient of the term with respect
/// to the score `u·v` is `σ(u·v) - label`.
fn logistic_term(v_in: &[f64], u: &[f64], label: bool) -> (f64, f64) {
    let s: f64 = v_in.iter().zip(u).map(|(a, b)| a * b).sum();
    if label {
        (neg_log_sigmoid(s), sigmoid(s) - 1.0)
    } else {
        (neg_log_sigmoid(-s), sigmoid(s))
    }
}

/// One (center, context, negatives) training example with the center's
/// input vector split into its token row and subword bucket rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramPair {
    pub token_row: Vec<f64>,
    pub bucket_rows: Vec<Vec<f64>>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkipGramPairGrad {
    pub token_row: Vec<f64>,
    pub bucket_rows: Vec<Vec<f64>>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

impl SkipGramPair {
    /// Token row plus the mean of the bucket rows.
    pub fn input_vector(&self) -> Vec<f64> {
        let mut v = self.token_row.clone();
        if !self.bucket_rows.is_empty() {
            let inv = 1.0 / self.bucket_rows.len() as f64;
            for b in &self.bucket_rows {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += inv * bi;
                }
            }
        }
        v
    }

    /// `-log σ(u_ctx·v) - Σ_neg log σ(-u_neg·v)`
    pub fn loss(&self) -> f64 {
        let v = self.input_vector();
        let pos = logistic_term(&v, &self.context, true).0;
        pos + self.negatives.iter().map(|u| logistic_term(&v, u, false).0).sum::<f64>()
    }

    pub fn gradients(&self) -> SkipGramPairGrad {
        let v = self.input_vector();
        let mut g_in = vec![0.0; v.len()];
        let mut term = |u: &[f64], label: bool| -> Vec<f64> {
            let (_, c) = logistic_term(&v, u, label);
            for (g, ui) in g_in.iter_mut().zip(u) {
                *g += c * ui;
            }
            v.iter().map(|vi| c * vi).collect()
        };
        let context = term(&self.context, true);
        let negatives = self.negatives.iter().map(|u| term(u, false)).collect();
        let k = self.bucket_rows.len().max(1) as f64;
        let bucket_rows = self.bucket_rows.iter().map(|_| g_in.iter().map(|g| g / k).collect()).collect();
        SkipGramPairGrad { token_row: g_in, bucket_rows, context, negatives }
    }
}

/// Inverse-CDF sampler over a discrete distribution.
struct NegativeSampler {
    cumulative: Vec<f64>,
}

impl NegativeSampler {
    fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = p
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        NegativeSampler { cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

/// Trains token embeddings and returns the table with the mean per-pair loss
/// of every epoch.
pub fn train_token_embeddings(
    walks: &[Walk],
    vocab: &Vocabulary,
    cfg: &SkipGramConfig,
    rng: &mut impl Rng,
) -> (EmbeddingTable, Vec<f64>) {
    let mut table = EmbeddingTable::initialize(vocab.clone(), cfg.dim, cfg.n_min, cfg.n_max, cfg.buckets, rng);
    let dim = cfg.dim;
    let sequences: Vec<Vec<usize>> = walks
        .iter()
        .map(|w| w.tokens.iter().filter_map(|t| vocab.id(t)).collect())
        .collect();
    let subwords: Vec<Vec<usize>> = vocab.tokens().iter().map(|t| table.subword_buckets(t)).collect();
    let sampler = NegativeSampler::new(&unigram_distribution(vocab, cfg.power));
    let total_centers: usize = sequences.iter().map(Vec::len).sum::<usize>() * cfg.epochs;

    let mut order: Vec<usize> = (0..sequences.len()).collect();
    let mut processed = 0usize;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut v_in = vec![0.0f64; dim];
    let mut g_in = vec![0.0f64; dim];
    let mut u = vec![0.0f64; dim];

    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        let mut loss_sum = 0.0;
        let mut pairs = 0usize;
        for &si in &order {
            let seq = &sequences[si];
            for (i, &center) in seq.iter().enumerate() {
                let lr = cfg.lr * (1.0 - processed as f64 / total_centers as f64);
                processed += 1;
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(seq.len() - 1);
                for j in (lo..=hi).filter(|&j| j != i) {
                    let ctx = seq[j];
                    compose_input(&table, center, &subwords[center], &mut v_in);
                    g_in.iter_mut().for_each(|g| *g = 0.0);
                    let mut loss = 0.0;
                    let mut update_output = |target: usize, label: bool, table: &mut EmbeddingTable| {
                        let row = &mut table.output[target * dim..(target + 1) * dim];
                        for (ui, &r) in u.iter_mut().zip(row.iter()) {
                            *ui = r as f64;
                        }
                        let (l, c) = logistic_term(&v_in, &u, label);
                        for (g, ui) in g_in.iter_mut().zip(&u) {
                            *g += c * ui;
                        }
                        for (r, vi) in row.iter_mut().zip(&v_in) {
                            *r -= (lr * c * vi) as f32;
                        }
                        l
                    };
                    loss += update_output(ctx, true, &mut table);
                    if vocab.len() > 1 {
                        for _ in 0..cfg.negatives {
                            let mut neg = sampler.sample(rng);
                            while neg == ctx {
                                neg = sampler.sample(rng);
                            }
                            loss += update_output(neg, false, &mut table);
                        }
                    }
                    apply_input_gradient(&mut table, center, &subwords[center], &g_in, lr);
                    loss_sum += loss;
                    pairs += 1;
                }
            }
        }
        history.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }
    (table, history)
}

fn compose_input(table: &EmbeddingTable, id: usize, buckets: &[usize], out: &mut [f64]) {
    for (o, &x) in out.iter_mut().zip(table.input_row(id)) {
        *o = x as f64;
    }
    if !buckets.is_empty() {
        let inv = 1.0 / buckets.len() as f64;
        for &b in buckets {
            for (o, &x) in out.iter_mut().zip(table.bucket_row(b)) {
                *o += inv * x as f64;
            }
        }
    }
}

fn apply_input_gradient(table: &mut EmbeddingTable, id: usize, buckets: &[usize], g: &[f64], lr: f64) {
    let dim = table.dim;
    for (r, gi) in table.input[id * dim..(id + 1) * dim].iter_mut().zip(g) {
        *r -= (lr * gi) as f32;
    }
    if !buckets.is_empty() {
        let scale = lr / buckets.len() as f64;
        for &b in buckets {
            for (r, gi) in table.buckets[b * dim..(b + 1) * dim].iter_mut().zip(g) {
                *r -= (scale * gi) as f32;
            }
        }
    }
}
