use crate::linalg::{norm, Matrix};

use super::EncoderError;

/// NT-Xent over `2N` anchors. Row `i` of `view_a` is paired with row `i` of
/// `view_b`; every other row of either view is a negative. Rows are compared
/// by cosine similarity.
pub fn ntxent_loss(view_a: &Matrix, view_b: &Matrix, tau: f64) -> Result<f64, EncoderError> {
    let z = stack_views(view_a, view_b)?;
    let unit = Matrix::from_vec(
        z.rows,
        z.cols,
        (0..z.rows)
            .flat_map(|i| {
                let r = z.row(i);
                let n = norm(r);
                r.iter().map(move |x| x / n).collect::<Vec<_>>()
            })
            .collect(),
    );
    if !unit.is_finite() {
        return Err(EncoderError::ZeroEmbedding);
    }
    Ok(loss_and_grad(&unit, tau).0)
}

pub(crate) fn stack_views(view_a: &Matrix, view_b: &Matrix) -> Result<Matrix, EncoderError> {
    if view_a.rows != view_b.rows || view_a.cols != view_b.cols {
        return Err(EncoderError::DimensionMismatch {
            what: "view B",
            expected: (view_a.rows, view_a.cols),
            found: (view_b.rows, view_b.cols),
        });
    }
    if view_a.rows < 2 {
        return Err(EncoderError::BatchTooSmall(view_a.rows));
    }
    let mut data = view_a.data.clone();
    data.extend_from_slice(&view_b.data);
    Ok(Matrix::from_vec(2 * view_a.rows, view_a.cols, data))
}

/// Loss and its gradient with respect to the stacked unit rows `z` (view A
/// in rows `0..N`, view B in rows `N..2N`).
///
/// With `P` the row-wise softmax over non-self candidates,
/// `dL/dz_k = (Σ_{c≠k} (P_kc + P_ck) z_c − 2 z_{p(k)}) / (2Nτ)`.
pub(crate) fn loss_and_grad(z: &Matrix, tau: f64) -> (f64, Matrix) {
    let m = z.rows;
    let n = m / 2;
    let partner = |i: usize| if i < n { i + n } else { i - n };
    let mut sim = Matrix::zeros(m, m);
    crate::linalg::gemm(1.0 / tau, z, false, z, true, 0.0, &mut sim);

    let mut prob = Matrix::zeros(m, m);
    let mut loss = 0.0;
    for i in 0..m {
        let row = sim.row(i);
        let max = (0..m).filter(|&c| c != i).map(|c| row[c]).fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for c in (0..m).filter(|&c| c != i) {
            denom += (row[c] - max).exp();
        }
        loss += max + denom.ln() - row[partner(i)];
        let p = prob.row_mut(i);
        for c in (0..m).filter(|&c| c != i) {
            p[c] = (sim.data[i * m + c] - max).exp() / denom;
        }
    }
    loss /= m as f64;

    // coefficient matrix: C = P + Pᵀ − 2·Partner, then dZ = C z / (2Nτ)
    let mut coef = Matrix::zeros(m, m);
    for i in 0..m {
        for c in 0..m {
            coef.data[i * m + c] = prob.data[i * m + c] + prob.data[c * m + i];
        }
        coef.data[i * m + partner(i)] -= 2.0;
    }
    let mut grad = Matrix::zeros(m, z.cols);
    crate::linalg::gemm(1.0 / (m as f64 * tau), &coef, false, z, false, 0.0, &mut grad);
    (loss, grad)
}
