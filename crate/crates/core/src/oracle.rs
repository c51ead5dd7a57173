//! Slow reference implementations.
//!
//! Each function recomputes a result from its textbook definition with plain
//! loops and full intermediate matrices, sharing no code with the fast paths
//! it is compared against. Used by the unit tests and by `verify`.

use crate::fusion::layers::MultiHeadAttention;
use crate::fusion::FusionParams;

/// `(rows x inner) * (inner x cols)`, `b` given transposed (`cols x inner`).
fn matmul_bt(a: &[f64], rows: usize, inner: usize, bt: &[f64], cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for k in 0..inner {
                acc += a[r * inner + k] * bt[c * inner + k];
            }
            out[r * cols + c] = acc;
        }
    }
    out
}

fn affine(x: &[f64], rows: usize, inner: usize, w: &[f64], b: &[f64]) -> Vec<f64> {
    let cols = b.len();
    let mut out = matmul_bt(x, rows, inner, w, cols);
    for r in 0..rows {
        for c in 0..cols {
            out[r * cols + c] += b[c];
        }
    }
    out
}

/// Per position: `W [f2d_p; f3d_p] + b`.
pub fn concat_project(f2d: &[f64], f3d: &[f64], channels: usize, weight: &[f64], bias: &[f64]) -> Vec<f64> {
    let positions = f2d.len() / channels;
    let mut out = vec![0.0; f2d.len()];
    for p in 0..positions {
        for o in 0..channels {
            let mut acc = bias[o];
            for i in 0..channels {
                acc += weight[o * 2 * channels + i] * f2d[p * channels + i];
                acc += weight[o * 2 * channels + channels + i] * f3d[p * channels + i];
            }
            out[p * channels + o] = acc;
        }
    }
    out
}

/// Plain copies of attention projections.
#[derive(Debug, Clone)]
pub struct AttentionWeights {
    pub heads: usize,
    pub wq: Vec<f64>,
    pub bq: Vec<f64>,
    pub wk: Vec<f64>,
    pub bk: Vec<f64>,
    pub wv: Vec<f64>,
    pub bv: Vec<f64>,
    pub wo: Vec<f64>,
    pub bo: Vec<f64>,
}

impl AttentionWeights {
    pub fn of(m: &MultiHeadAttention) -> Self {
        AttentionWeights {
            heads: m.heads,
            wq: m.query.weight.clone(),
            bq: m.query.bias.clone(),
            wk: m.key.weight.clone(),
            bk: m.key.bias.clone(),
            wv: m.value.weight.clone(),
            bv: m.value.bias.clone(),
            wo: m.output.weight.clone(),
            bo: m.output.bias.clone(),
        }
    }
}

/// Multi-head attention from full score matrices, one head at a time.
pub fn attention(queries: &[f64], context: &[f64], dim: usize, w: &AttentionWeights) -> Vec<f64> {
    let nq = queries.len() / dim;
    let nk = context.len() / dim;
    let q = affine(queries, nq, dim, &w.wq, &w.bq);
    let k = affine(context, nk, dim, &w.wk, &w.bk);
    let v = affine(context, nk, dim, &w.wv, &w.bv);
    let hd = dim / w.heads;
    let mut concat = vec![0.0; nq * dim];
    for h in 0..w.heads {
        let slice = |m: &[f64], rows: usize| -> Vec<f64> {
            (0..rows).flat_map(|r| m[r * dim + h * hd..r * dim + (h + 1) * hd].to_vec()).collect()
        };
        let (qh, kh, vh) = (slice(&q, nq), slice(&k, nk), slice(&v, nk));
        let mut scores = matmul_bt(&qh, nq, hd, &kh, nk);
        for s in scores.iter_mut() {
            *s /= (hd as f64).sqrt();
        }
        for r in 0..nq {
            let row = &mut scores[r * nk..(r + 1) * nk];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = row.iter().map(|s| (s - m).exp()).sum();
            for s in row.iter_mut() {
                *s = (*s - m).exp() / total;
            }
        }
        // weights (nq x nk) times values (nk x hd)
        for r in 0..nq {
            for c in 0..hd {
                let mut acc = 0.0;
                for j in 0..nk {
                    acc += scores[r * nk + j] * vh[j * hd + c];
                }
                concat[r * dim + h * hd + c] = acc;
            }
        }
    }
    affine(&concat, nq, dim, &w.wo, &w.bo)
}

/// `f2d + MHCA(f2d, f3d, f3d)`.
pub fn cross_attention_residual(f2d: &[f64], f3d: &[f64], dim: usize, w: &AttentionWeights) -> Vec<f64> {
    let a = attention(f2d, f3d, dim, w);
    f2d.iter().zip(&a).map(|(x, y)| x + y).collect()
}

/// Plain copies of a pre-norm encoder layer.
#[derive(Debug, Clone)]
pub struct EncoderLayerWeights {
    pub attention: AttentionWeights,
    pub ln1: (Vec<f64>, Vec<f64>, f64),
    pub ln2: (Vec<f64>, Vec<f64>, f64),
    pub up: (Vec<f64>, Vec<f64>),
    pub down: (Vec<f64>, Vec<f64>),
}

impl EncoderLayerWeights {
    /// Panics unless `params` is self-attention.
    pub fn of(params: &FusionParams) -> Self {
        let FusionParams::SelfAttention {
            attention,
            norm1,
            norm2,
            feed_forward,
        } = params
        else {
            panic!("not self-attention parameters");
        };
        EncoderLayerWeights {
            attention: AttentionWeights::of(attention),
            ln1: (norm1.gamma.clone(), norm1.beta.clone(), norm1.eps),
            ln2: (norm2.gamma.clone(), norm2.beta.clone(), norm2.eps),
            up: (feed_forward.up.weight.clone(), feed_forward.up.bias.clone()),
            down: (feed_forward.down.weight.clone(), feed_forward.down.bias.clone()),
        }
    }
}

fn layer_norm(x: &[f64], dim: usize, (gamma, beta, eps): &(Vec<f64>, Vec<f64>, f64)) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for row in x.chunks(dim) {
        let mean = row.iter().sum::<f64>() / dim as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / dim as f64;
        for (i, v) in row.iter().enumerate() {
            out.push(gamma[i] * (v - mean) / (var + eps).sqrt() + beta[i]);
        }
    }
    out
}

/// Pre-norm encoder layer over `[f2d; f3d]`, returning the `f2d` half.
pub fn self_attention_layer(f2d: &[f64], f3d: &[f64], dim: usize, w: &EncoderLayerWeights) -> Vec<f64> {
    let x: Vec<f64> = f2d.iter().chain(f3d).cloned().collect();
    let rows = x.len() / dim;
    let n1 = layer_norm(&x, dim, &w.ln1);
    let a = attention(&n1, &n1, dim, &w.attention);
    let y: Vec<f64> = x.iter().zip(&a).map(|(p, q)| p + q).collect();
    let n2 = layer_norm(&y, dim, &w.ln2);
    let hidden: Vec<f64> = affine(&n2, rows, dim, &w.up.0, &w.up.1)
        .into_iter()
        .map(|v| if v > 0.0 { v } else { 0.0 })
        .collect();
    let f = affine(&hidden, rows, 4 * dim, &w.down.0, &w.down.1);
    let z: Vec<f64> = y.iter().zip(&f).map(|(p, q)| p + q).collect();
    z[..f2d.len()].to_vec()
}

/// One row of an action table: `x, y, z, qw, qx, qy, qz, open`.
pub type ActionRow = [f64; 8];

/// Behavior-cloning loss by a single flat loop: every step adds
/// `sum(dxyz^2)/3 + sum(dq^2)/4 + bce`, and the total is divided by the step
/// count.
pub fn flat_loop_loss(dataset: &[Vec<(ActionRow, ActionRow)>]) -> f64 {
    let eps = 1e-7;
    let mut total = 0.0;
    let mut steps = 0usize;
    for trajectory in dataset {
        for (pred, target) in trajectory {
            let mut se_xyz = 0.0;
            for i in 0..3 {
                se_xyz += (pred[i] - target[i]) * (pred[i] - target[i]);
            }
            let mut se_q = 0.0;
            for i in 3..7 {
                se_q += (pred[i] - target[i]) * (pred[i] - target[i]);
            }
            let p = pred[7].clamp(eps, 1.0 - eps);
            let y = target[7];
            let bce = -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
            total += se_xyz / 3.0 + se_q / 4.0 + bce;
            steps += 1;
        }
    }
    total / steps as f64
}
