//! Small dense building blocks for the fusion operators. Sequences are flat
//! row-major `len x dim` slices.

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `[out][in]`, row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    /// Square identity map.
    pub fn identity(dim: usize) -> Self {
        let mut l = Linear::zeros(dim, dim);
        for i in 0..dim {
            l.weight[i * dim + i] = 1.0;
        }
        l
    }

    /// Weights uniform in `±1/sqrt(in_dim)`, zero bias.
    pub fn random(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let mut l = Linear::zeros(in_dim, out_dim);
        l.weight.iter_mut().for_each(|w| *w = rng.gen_range(-bound..bound));
        l
    }

    pub fn apply_row(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.in_dim);
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weight[o * self.in_dim..(o + 1) * self.in_dim];
            *slot = self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    /// Applies the map to every row of a `len x in_dim` sequence.
    pub fn apply(&self, xs: &[f64]) -> Vec<f64> {
        let len = xs.len() / self.in_dim;
        let mut out = vec![0.0; len * self.out_dim];
        for (x, y) in xs.chunks_exact(self.in_dim).zip(out.chunks_exact_mut(self.out_dim)) {
            self.apply_row(x, y);
        }
        out
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.weight.iter().chain(&self.bias).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNorm {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    pub eps: f64,
}

impl LayerNorm {
    pub fn new(dim: usize) -> Self {
        LayerNorm {
            gamma: vec![1.0; dim],
            beta: vec![0.0; dim],
            eps: 1e-5,
        }
    }

    pub fn apply(&self, xs: &[f64]) -> Vec<f64> {
        let dim = self.gamma.len();
        let mut out = vec![0.0; xs.len()];
        for (x, y) in xs.chunks_exact(dim).zip(out.chunks_exact_mut(dim)) {
            let mean = x.iter().sum::<f64>() / dim as f64;
            let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / dim as f64;
            let inv = 1.0 / (var + self.eps).sqrt();
            for i in 0..dim {
                y[i] = (x[i] - mean) * inv * self.gamma[i] + self.beta[i];
            }
        }
        out
    }
}

/// Position-wise `dim -> 4 dim -> dim` block with ReLU.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForward {
    pub up: Linear,
    pub down: Linear,
}

impl FeedForward {
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        FeedForward {
            up: Linear::random(dim, 4 * dim, rng),
            down: Linear::random(4 * dim, dim, rng),
        }
    }

    pub fn apply(&self, xs: &[f64]) -> Vec<f64> {
        let mut hidden = self.up.apply(xs);
        hidden.iter_mut().for_each(|v| *v = v.max(0.0));
        self.down.apply(&hidden)
    }
}

/// In-place softmax with max subtraction.
pub fn softmax(xs: &mut [f64]) {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in xs.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    xs.iter_mut().for_each(|v| *v /= sum);
}

/// Multi-head scaled dot-product attention with query, key, value and output
/// projections. Scores are scaled by `1/sqrt(dim / heads)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHeadAttention {
    pub heads: usize,
    pub query: Linear,
    pub key: Linear,
    pub value: Linear,
    pub output: Linear,
}

impl MultiHeadAttention {
    pub fn random(dim: usize, heads: usize, rng: &mut impl Rng) -> Self {
        MultiHeadAttention {
            heads,
            query: Linear::random(dim, dim, rng),
            key: Linear::random(dim, dim, rng),
            value: Linear::random(dim, dim, rng),
            output: Linear::random(dim, dim, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.query.in_dim
    }

    /// Attends from every row of `queries` over the rows of `context`.
    pub fn forward(&self, queries: &[f64], context: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let head_dim = dim / self.heads;
        let scale = 1.0 / (head_dim as f64).sqrt();
        let q = self.query.apply(queries);
        let k = self.key.apply(context);
        let v = self.value.apply(context);
        let (nq, nk) = (queries.len() / dim, context.len() / dim);
        let mut mixed = vec![0.0; nq * dim];
        let mut weights = vec![0.0; nk];
        for h in 0..self.heads {
            let cols = h * head_dim..(h + 1) * head_dim;
            for i in 0..nq {
                let qi = &q[i * dim..][cols.clone()];
                for (j, w) in weights.iter_mut().enumerate() {
                    let kj = &k[j * dim..][cols.clone()];
                    *w = scale * qi.iter().zip(kj).map(|(a, b)| a * b).sum::<f64>();
                }
                softmax(&mut weights);
                let out = &mut mixed[i * dim..][cols.clone()];
                for (j, w) in weights.iter().enumerate() {
                    let vj = &v[j * dim..][cols.clone()];
                    for (o, x) in out.iter_mut().zip(vj) {
                        *o += w * x;
                    }
                }
            }
        }
        self.output.apply(&mixed)
    }

    pub(crate) fn is_finite(&self) -> bool {
        [&self.query, &self.key, &self.value, &self.output]
            .iter()
            .all(|l| l.is_finite())
    }
}
