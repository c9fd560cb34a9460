//! Message-passing formula encoder and its contrastive training.

mod checkpoint;
mod network;
mod ntxent;
mod params;
mod train;

use std::io;

use thiserror::Error;

use crate::augment::AugmentError;
use crate::embed::FeaturedGraph;
use crate::linalg::Matrix;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use ntxent::ntxent_loss;
pub use params::{EncoderParams, Layer};
pub use train::{train_gcl, TrainConfig};

use network::{backward, forward, Batch};

#[derive(Debug, Error)]
pub enum EncoderError {
    #[error("{what}: expected {expected:?}, found {found:?}")]
    DimensionMismatch { what: &'static str, expected: (usize, usize), found: (usize, usize) },
    #[error("batch size {0} leaves no negatives (need at least 2)")]
    BatchTooSmall(usize),
    #[error("corpus has {available} formulas but one batch needs {needed}")]
    CorpusTooSmall { needed: usize, available: usize },
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("embedding row has zero norm")]
    ZeroEmbedding,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error("checkpoint I/O: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
}

/// Unit-norm embedding of one graph.
///
/// A graph whose final ReLU outputs are all zero has no direction; it maps to
/// the uniform unit vector.
pub fn encode(params: &EncoderParams, fg: &FeaturedGraph) -> Result<Vec<f64>, EncoderError> {
    Ok(encode_batch(params, &[fg])?.data)
}

/// Embeddings of several graphs, one row each.
pub fn encode_batch(params: &EncoderParams, graphs: &[&FeaturedGraph]) -> Result<Matrix, EncoderError> {
    let batch = Batch::new(graphs, params.input_dim(), params.edge_dim)?;
    Ok(forward(params, &batch).embeddings)
}

/// NT-Xent loss of the paired batches and its gradient with respect to every
/// parameter.
pub fn loss_gradients(
    params: &EncoderParams,
    batch_a: &[FeaturedGraph],
    batch_b: &[FeaturedGraph],
    tau: f64,
) -> Result<(f64, EncoderParams), EncoderError> {
    if batch_a.len() != batch_b.len() {
        return Err(EncoderError::DimensionMismatch {
            what: "view B batch",
            expected: (batch_a.len(), 1),
            found: (batch_b.len(), 1),
        });
    }
    if batch_a.len() < 2 {
        return Err(EncoderError::BatchTooSmall(batch_a.len()));
    }
    let graphs: Vec<&FeaturedGraph> = batch_a.iter().chain(batch_b).collect();
    let batch = Batch::new(&graphs, params.input_dim(), params.edge_dim)?;
    let fwd = forward(params, &batch);
    let (loss, dz) = ntxent::loss_and_grad(&fwd.embeddings, tau);
    Ok((loss, backward(params, &batch, &fwd, &dz)))
}

/// Untrained baseline: the mean node feature row, L2-normalized. Like
/// [`encode`], a zero mean maps to the uniform unit vector.
pub fn baseline_embed(fg: &FeaturedGraph) -> Vec<f64> {
    let x = &fg.node_features;
    let mut mean = vec![0.0; x.cols];
    for r in 0..x.rows {
        for (m, v) in mean.iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    network::normalize_or_uniform(&mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{build_graph, parse_formula, Layout, MathGraph, NodeKind};
    use crate::linalg::norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_featured(g: MathGraph, d: usize, de: usize, rng: &mut impl Rng) -> FeaturedGraph {
        let n = g.node_count();
        let m = g.edge_count();
        FeaturedGraph {
            node_features: Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            edge_features: Matrix::from_vec(m, de, (0..m * de).map(|_| rng.gen_range(-1.0..1.0)).collect()),
            graph: g,
        }
    }

    fn graph(latex: &str, layout: Layout) -> MathGraph {
        build_graph(&parse_formula(latex).unwrap(), layout)
    }

    #[test]
    fn single_node_identity_layer() {
        let mut g = MathGraph::new(Layout::Slt);
        g.add_node(NodeKind::Variable, "x");
        let d = 4;
        let mut feat = Matrix::zeros(1, d);
        feat.row_mut(0)[0] = 0.5;
        feat.row_mut(0)[1] = -0.2;
        let fg = FeaturedGraph { graph: g, node_features: feat, edge_features: Matrix::zeros(0, 2) };
        let params = EncoderParams {
            layers: vec![Layer {
                w_self: Matrix::identity(d),
                w_nbr: Matrix::zeros(d, d),
                w_edge: Matrix::zeros(d, 2),
                bias: vec![0.0; d],
            }],
            edge_dim: 2,
        };
        assert_eq!(encode(&params, &fg).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn unit_norm_and_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = EncoderParams::initialize(&[6, 8, 5], 3, &mut rng);
        let fg = random_featured(graph(r"\frac{x+1}{y^{2}}", Layout::Opt), 6, 3, &mut rng);
        let z = encode(&params, &fg).unwrap();
        assert!((norm(&z) - 1.0).abs() < 1e-9);

        // reverse node order
        let n = fg.graph.node_count();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut pg = fg.graph.clone();
        pg.nodes = perm.iter().map(|&i| fg.graph.nodes[i].clone()).collect();
        for e in pg.edges.iter_mut() {
            e.src = n - 1 - e.src;
            e.dst = n - 1 - e.dst;
        }
        pg.root = n - 1 - fg.graph.root;
        let pfg = FeaturedGraph { graph: pg, node_features: fg.node_features.select_rows(&perm), edge_features: fg.edge_features.clone() };
        let pz = encode(&params, &pfg).unwrap();
        for (a, b) in z.iter().zip(&pz) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn edgeless_and_dead_graphs_are_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = EncoderParams::initialize(&[4, 6], 2, &mut rng);
        let mut g = MathGraph::new(Layout::Slt);
        g.add_node(NodeKind::Variable, "x");
        g.add_node(NodeKind::Number, "2");
        let fg = random_featured(g, 4, 2, &mut rng);
        assert!((norm(&encode(&params, &fg).unwrap()) - 1.0).abs() < 1e-9);
        // all pre-activations negative
        params.layers[0].bias = vec![-100.0; 6];
        let z = encode(&params, &fg).unwrap();
        assert!((norm(&z) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = EncoderParams::initialize(&[4, 6], 2, &mut rng);
        let fg = random_featured(graph("x+y", Layout::Slt), 5, 2, &mut rng);
        assert!(matches!(encode(&params, &fg), Err(EncoderError::DimensionMismatch { .. })));
    }

    #[test]
    fn batch_encoding_matches_single() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let params = EncoderParams::initialize(&[5, 7, 4], 3, &mut rng);
        let gs: Vec<FeaturedGraph> = ["x+y", r"\sqrt{a}b", "z"]
            .iter()
            .map(|t| random_featured(graph(t, Layout::Slt), 5, 3, &mut rng))
            .collect();
        let refs: Vec<&FeaturedGraph> = gs.iter().collect();
        let batch = encode_batch(&params, &refs).unwrap();
        for (i, g) in gs.iter().enumerate() {
            assert_eq!(batch.row(i), encode(&params, g).unwrap().as_slice());
        }
    }

    fn relative_error(a: &[f64], b: &[f64]) -> f64 {
        let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = norm(a) + norm(b);
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let texts = ["x+y", r"\frac{a}{b}", "x^{2}", r"\sin(x)", "a b c", "1-z"];
        for layout in [Layout::Slt, Layout::Opt] {
            let n = 3;
            let a: Vec<FeaturedGraph> =
                texts[..n].iter().map(|t| random_featured(graph(t, layout), 4, 2, &mut rng)).collect();
            let b: Vec<FeaturedGraph> =
                texts[n..].iter().map(|t| random_featured(graph(t, layout), 4, 2, &mut rng)).collect();
            let params = EncoderParams::initialize(&[4, 5, 3], 2, &mut rng);
            let (_, grads) = loss_gradients(&params, &a, &b, 0.5).unwrap();
            let h = 1e-5;
            let loss_at = |p: &EncoderParams| loss_gradients(p, &a, &b, 0.5).unwrap().0;
            for (t, analytic) in grads.tensors().into_iter().enumerate() {
                let numeric: Vec<f64> = (0..analytic.len())
                    .map(|k| {
                        let mut plus = params.clone();
                        plus.tensors_mut()[t][k] += h;
                        let mut minus = params.clone();
                        minus.tensors_mut()[t][k] -= h;
                        (loss_at(&plus) - loss_at(&minus)) / (2.0 * h)
                    })
                    .collect();
                assert!(relative_error(analytic, &numeric) < 1e-4, "tensor {t}");
            }
        }
    }

    #[test]
    fn baseline_is_normalized_mean() {
        let mut g = MathGraph::new(Layout::Slt);
        g.add_node(NodeKind::Variable, "x");
        g.add_node(NodeKind::Variable, "y");
        g.add_edge(0, 1, crate::formula::EdgeLabel::Next);
        let fg = FeaturedGraph {
            graph: g,
            node_features: Matrix::from_vec(2, 2, vec![3.0, 4.0, 3.0, 4.0]),
            edge_features: Matrix::zeros(1, 1),
        };
        assert_eq!(baseline_embed(&fg), vec![0.6, 0.8]);
    }
}
