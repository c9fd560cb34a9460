use rand::Rng;

use crate::linalg::Matrix;

/// Weights of one message-passing layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `d_out × d_in`
    pub w_self: Matrix,
    /// `d_out × d_in`
    pub w_nbr: Matrix,
    /// `d_out × d_e`
    pub w_edge: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.w_self.cols
    }

    pub fn out_dim(&self) -> usize {
        self.w_self.rows
    }

    fn zeros(d_in: usize, d_out: usize, d_e: usize) -> Self {
        Layer {
            w_self: Matrix::zeros(d_out, d_in),
            w_nbr: Matrix::zeros(d_out, d_in),
            w_edge: Matrix::zeros(d_out, d_e),
            bias: vec![0.0; d_out],
        }
    }

    fn tensors(&self) -> [&[f64]; 4] {
        [&self.w_self.data, &self.w_nbr.data, &self.w_edge.data, &self.bias]
    }

    fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w_self.data, &mut self.w_nbr.data, &mut self.w_edge.data, &mut self.bias]
    }
}

/// Encoder weights; the same structure holds gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub layers: Vec<Layer>,
    pub edge_dim: usize,
}

impl EncoderParams {
    /// Glorot-uniform weights `±sqrt(6 / (fan_in + fan_out))` per matrix, zero
    /// biases. Values are drawn in `f32` so checkpoints store them exactly.
    pub fn initialize(dims: &[usize], edge_dim: usize, rng: &mut impl Rng) -> Self {
        assert!(dims.len() >= 2, "need an input width and at least one layer");
        let mut glorot = |rows: usize, cols: usize| {
            let bound = (6.0 / (rows + cols) as f64).sqrt() as f32;
            let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound) as f64).collect();
            Matrix::from_vec(rows, cols, data)
        };
        let layers = dims
            .windows(2)
            .map(|w| {
                let (d_in, d_out) = (w[0], w[1]);
                Layer {
                    w_self: glorot(d_out, d_in),
                    w_nbr: glorot(d_out, d_in),
                    w_edge: glorot(d_out, edge_dim),
                    bias: vec![0.0; d_out],
                }
            })
            .collect();
        EncoderParams { layers, edge_dim }
    }

    pub fn zeros_like(&self) -> Self {
        EncoderParams {
            layers: self.layers.iter().map(|l| Layer::zeros(l.in_dim(), l.out_dim(), self.edge_dim)).collect(),
            edge_dim: self.edge_dim,
        }
    }

    /// `[d_0, d_1, ..., d_L]`
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].in_dim()];
        d.extend(self.layers.iter().map(Layer::out_dim));
        d
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").out_dim()
    }

    /// Every tensor in declared order: per layer `w_self, w_nbr, w_edge, bias`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(Layer::tensors).collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        self.layers.iter_mut().flat_map(Layer::tensors_mut).collect()
    }

    /// Euclidean norm over every tensor.
    pub fn norm(&self) -> f64 {
        self.tensors().iter().flat_map(|t| t.iter()).map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &EncoderParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }

    pub fn round_to_f32(&mut self) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|x| *x = *x as f32 as f64);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}
