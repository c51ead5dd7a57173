//! 3x3, stride 2, zero padding 1 convolution on planar `C x H x W` tensors.

pub const KERNEL: usize = 3;
pub const STRIDE: usize = 2;
pub const PAD: usize = 1;

/// Output extent for an input extent `n`: `ceil(n / 2)`.
pub fn out_size(n: usize) -> usize {
    (n + 2 * PAD - KERNEL) / STRIDE + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    /// `[out][in][ky][kx]`, row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn zeros(in_channels: usize, out_channels: usize) -> Self {
        Conv2d {
            in_channels,
            out_channels,
            weight: vec![0.0; out_channels * in_channels * KERNEL * KERNEL],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn fan_in(&self) -> usize {
        self.in_channels * KERNEL * KERNEL
    }

    #[inline]
    fn widx(&self, o: usize, c: usize, ky: usize, kx: usize) -> usize {
        ((o * self.in_channels + c) * KERNEL + ky) * KERNEL + kx
    }

    /// Input coordinate hit by output `i` and kernel tap `k`, if inside.
    #[inline]
    fn tap(i: usize, k: usize, n: usize) -> Option<usize> {
        (i * STRIDE + k).checked_sub(PAD).filter(|&p| p < n)
    }

    pub fn forward(&self, input: &[f64], h: usize, w: usize) -> Vec<f64> {
        debug_assert_eq!(input.len(), self.in_channels * h * w);
        let (ho, wo) = (out_size(h), out_size(w));
        let mut out = vec![0.0; self.out_channels * ho * wo];
        for o in 0..self.out_channels {
            let plane = &mut out[o * ho * wo..(o + 1) * ho * wo];
            plane.fill(self.bias[o]);
            for c in 0..self.in_channels {
                let src = &input[c * h * w..(c + 1) * h * w];
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let wt = self.weight[self.widx(o, c, ky, kx)];
                        for i in 0..ho {
                            let Some(y) = Self::tap(i, ky, h) else { continue };
                            for j in 0..wo {
                                if let Some(x) = Self::tap(j, kx, w) {
                                    plane[i * wo + j] += wt * src[y * w + x];
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates parameter gradients into `grad` and returns the gradient
    /// with respect to `input`.
    pub fn backward(&self, input: &[f64], h: usize, w: usize, dout: &[f64], grad: &mut Conv2d) -> Vec<f64> {
        let (ho, wo) = (out_size(h), out_size(w));
        debug_assert_eq!(dout.len(), self.out_channels * ho * wo);
        let mut din = vec![0.0; input.len()];
        for o in 0..self.out_channels {
            let g = &dout[o * ho * wo..(o + 1) * ho * wo];
            grad.bias[o] += g.iter().sum::<f64>();
            for c in 0..self.in_channels {
                let src = &input[c * h * w..(c + 1) * h * w];
                let dst = &mut din[c * h * w..(c + 1) * h * w];
                for ky in 0..KERNEL {
                    for kx in 0..KERNEL {
                        let wi = self.widx(o, c, ky, kx);
                        let wt = self.weight[wi];
                        let mut acc = 0.0;
                        for i in 0..ho {
                            let Some(y) = Self::tap(i, ky, h) else { continue };
                            for j in 0..wo {
                                if let Some(x) = Self::tap(j, kx, w) {
                                    let gij = g[i * wo + j];
                                    acc += gij * src[y * w + x];
                                    dst[y * w + x] += wt * gij;
                                }
                            }
                        }
                        grad.weight[wi] += acc;
                    }
                }
            }
        }
        din
    }
}
