//! Batched forward and backward passes of the message-passing encoder.
//!
//! All graphs of a batch are stacked into one block-diagonal graph so every
//! layer is three matrix products over the stacked node rows. Per layer:
//!
//! ```text
//! h_v' = ReLU(W_self h_v + W_nbr mean_{u ~ v} h_u + W_edge mean_{e ∋ v} x_e + b)
//! ```
//!
//! where `u ~ v` ranges over in- and out-neighbors and `e ∋ v` over incident
//! edges. The readout is the node mean of the last layer, L2-normalized.

use crate::embed::FeaturedGraph;
use crate::linalg::{gemm, Matrix};

use super::params::EncoderParams;
use super::EncoderError;

/// Stacked inputs of several graphs.
pub(crate) struct Batch {
    /// Node row offsets; graph `g` owns rows `offsets[g]..offsets[g + 1]`.
    offsets: Vec<usize>,
    /// Per stacked node: `(neighbor row, edge row)` for each incident edge.
    incident: Vec<Vec<(usize, usize)>>,
    features: Matrix,
    /// Mean incident edge feature per node (`M × d_e`); zero for isolated nodes.
    edge_mean: Matrix,
}

impl Batch {
    pub fn new(graphs: &[&FeaturedGraph], input_dim: usize, edge_dim: usize) -> Result<Self, EncoderError> {
        let total: usize = graphs.iter().map(|g| g.graph.node_count()).sum();
        let mut offsets = Vec::with_capacity(graphs.len() + 1);
        let mut incident = vec![Vec::new(); total];
        let mut features = Matrix::zeros(total, input_dim);
        let mut edge_mean = Matrix::zeros(total, edge_dim);
        let mut base = 0;
        for fg in graphs {
            let n = fg.graph.node_count();
            if n == 0 {
                return Err(EncoderError::EmptyGraph);
            }
            if fg.node_features.cols != input_dim || fg.node_features.rows != n {
                return Err(EncoderError::DimensionMismatch {
                    what: "node features",
                    expected: (n, input_dim),
                    found: (fg.node_features.rows, fg.node_features.cols),
                });
            }
            let m = fg.graph.edge_count();
            if fg.edge_features.cols != edge_dim || fg.edge_features.rows != m {
                return Err(EncoderError::DimensionMismatch {
                    what: "edge features",
                    expected: (m, edge_dim),
                    found: (fg.edge_features.rows, fg.edge_features.cols),
                });
            }
            offsets.push(base);
            features.data[base * input_dim..(base + n) * input_dim].copy_from_slice(&fg.node_features.data);
            for (j, e) in fg.graph.edges.iter().enumerate() {
                incident[base + e.src].push((base + e.dst, j));
                incident[base + e.dst].push((base + e.src, j));
            }
            for v in 0..n {
                let inc = &incident[base + v];
                if inc.is_empty() {
                    continue;
                }
                let inv = 1.0 / inc.len() as f64;
                let row = edge_mean.row_mut(base + v);
                for &(_, j) in inc {
                    for (r, x) in row.iter_mut().zip(fg.edge_features.row(j)) {
                        *r += inv * x;
                    }
                }
            }
            base += n;
        }
        offsets.push(base);
        Ok(Batch { offsets, incident, features, edge_mean })
    }

    pub fn graph_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Mean of neighbor rows of `h` per node.
    fn aggregate(&self, h: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(h.rows, h.cols);
        for (v, inc) in self.incident.iter().enumerate() {
            if inc.is_empty() {
                continue;
            }
            let inv = 1.0 / inc.len() as f64;
            let row = &mut out.data[v * h.cols..(v + 1) * h.cols];
            for &(u, _) in inc {
                for (r, x) in row.iter_mut().zip(h.row(u)) {
                    *r += inv * x;
                }
            }
        }
        out
    }

    /// Adjoint of [`Batch::aggregate`]: scatters `d_agg` back to neighbor rows.
    fn aggregate_transpose(&self, d_agg: &Matrix, out: &mut Matrix) {
        for (v, inc) in self.incident.iter().enumerate() {
            if inc.is_empty() {
                continue;
            }
            let inv = 1.0 / inc.len() as f64;
            for &(u, _) in inc {
                let (src, dst) = (d_agg.row(v).to_vec(), out.row_mut(u));
                for (d, s) in dst.iter_mut().zip(&src) {
                    *d += inv * s;
                }
            }
        }
    }
}

struct LayerCache {
    input: Matrix,
    agg: Matrix,
    pre: Matrix,
}

/// Forward state retained for the backward pass.
pub(crate) struct Forward {
    caches: Vec<LayerCache>,
    /// Unnormalized readouts, one row per graph.
    pooled: Matrix,
    /// Unit embeddings, one row per graph.
    pub embeddings: Matrix,
}

pub(crate) fn forward(params: &EncoderParams, batch: &Batch) -> Forward {
    let mut h = batch.features.clone();
    let mut caches = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let agg = batch.aggregate(&h);
        let mut pre = Matrix::zeros(h.rows, layer.out_dim());
        for r in 0..pre.rows {
            pre.row_mut(r).copy_from_slice(&layer.bias);
        }
        gemm(1.0, &h, false, &layer.w_self, true, 1.0, &mut pre);
        gemm(1.0, &agg, false, &layer.w_nbr, true, 1.0, &mut pre);
        gemm(1.0, &batch.edge_mean, false, &layer.w_edge, true, 1.0, &mut pre);
        let mut next = pre.clone();
        next.data.iter_mut().for_each(|x| *x = x.max(0.0));
        caches.push(LayerCache { input: h, agg, pre });
        h = next;
    }
    let d = h.cols;
    let g_count = batch.graph_count();
    let mut pooled = Matrix::zeros(g_count, d);
    let mut embeddings = Matrix::zeros(g_count, d);
    for g in 0..g_count {
        let (lo, hi) = (batch.offsets[g], batch.offsets[g + 1]);
        let inv = 1.0 / (hi - lo) as f64;
        let row = pooled.row_mut(g);
        for v in lo..hi {
            for (r, x) in row.iter_mut().zip(h.row(v)) {
                *r += inv * x;
            }
        }
        let unit = normalize_or_uniform(pooled.row(g));
        embeddings.row_mut(g).copy_from_slice(&unit);
    }
    Forward { caches, pooled, embeddings }
}

/// `x / ‖x‖`, or the uniform unit vector when every ReLU output is zero.
pub(crate) fn normalize_or_uniform(x: &[f64]) -> Vec<f64> {
    let n = crate::linalg::norm(x);
    if n > 0.0 {
        x.iter().map(|v| v / n).collect()
    } else {
        vec![1.0 / (x.len() as f64).sqrt(); x.len()]
    }
}

/// Back-propagates `d_embeddings` (one row per graph) into parameter gradients.
pub(crate) fn backward(params: &EncoderParams, batch: &Batch, fwd: &Forward, d_embeddings: &Matrix) -> EncoderParams {
    let mut grads = params.zeros_like();
    let last = fwd.caches.last().expect("at least one layer");
    let d = params.output_dim();
    let mut dh = Matrix::zeros(last.pre.rows, d);
    for g in 0..batch.graph_count() {
        let pooled = fwd.pooled.row(g);
        let norm = crate::linalg::norm(pooled);
        if norm == 0.0 {
            // constant fallback output carries no gradient
            continue;
        }
        let z = fwd.embeddings.row(g);
        let dz = d_embeddings.row(g);
        let proj = crate::linalg::dot(z, dz);
        let (lo, hi) = (batch.offsets[g], batch.offsets[g + 1]);
        let scale = 1.0 / (norm * (hi - lo) as f64);
        let d_pooled: Vec<f64> = z.iter().zip(dz).map(|(zi, di)| (di - zi * proj) * scale).collect();
        for v in lo..hi {
            dh.row_mut(v).copy_from_slice(&d_pooled);
        }
    }
    for (l, (layer, cache)) in params.layers.iter().zip(&fwd.caches).enumerate().rev() {
        let mut dpre = dh;
        for (g, p) in dpre.data.iter_mut().zip(&cache.pre.data) {
            if *p <= 0.0 {
                *g = 0.0;
            }
        }
        let gl = &mut grads.layers[l];
        gemm(1.0, &dpre, true, &cache.input, false, 0.0, &mut gl.w_self);
        gemm(1.0, &dpre, true, &cache.agg, false, 0.0, &mut gl.w_nbr);
        gemm(1.0, &dpre, true, &batch.edge_mean, false, 0.0, &mut gl.w_edge);
        for r in 0..dpre.rows {
            for (b, x) in gl.bias.iter_mut().zip(dpre.row(r)) {
                *b += x;
            }
        }
        if l == 0 {
            break;
        }
        let mut d_input = Matrix::zeros(dpre.rows, layer.in_dim());
        gemm(1.0, &dpre, false, &layer.w_self, false, 0.0, &mut d_input);
        let mut d_agg = Matrix::zeros(dpre.rows, layer.in_dim());
        gemm(1.0, &dpre, false, &layer.w_nbr, false, 0.0, &mut d_agg);
        batch.aggregate_transpose(&d_agg, &mut d_input);
        dh = d_input;
    }
    grads
}
