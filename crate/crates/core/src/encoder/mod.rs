//! Coordinate-map encoder.
//!
//! A two-layer convolutional stack,
//! `Conv(3 -> 16, 3x3, s2, p1) -> ReLU -> Conv(16 -> C, 3x3, s2, p1)`,
//! that turns an `H x W` three-channel input into an
//! `ceil(H/4) x ceil(W/4) x C` [`FeatureMap`]. It has no pooling, so it sees
//! where every point sits in the grid. The same architecture (with separate
//! weights) encodes RGB images, which gives fusion shape-compatible inputs.

mod blob;
pub mod conv;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::CoordinateMap;
use crate::error::{Error, Result};
use conv::{out_size, Conv2d};

pub use blob::{BLOB_MAGIC, BLOB_VERSION};

pub const INPUT_CHANNELS: usize = 3;
pub const HIDDEN_CHANNELS: usize = 16;
pub const DEFAULT_CHANNELS: usize = 32;
pub const MIN_EXTENT: usize = 4;

/// Planar `channels x height x width` image.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl PlanarImage {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {channels}x{height}x{width} image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image"));
        }
        Ok(PlanarImage {
            channels,
            height,
            width,
            data,
        })
    }

    /// Interleaved 8-bit RGB scaled to `[0, 1]`.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        if rgb.len() != 3 * width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} bytes for a {width}x{height} RGB image",
                rgb.len()
            )));
        }
        let n = width * height;
        let mut data = vec![0.0; 3 * n];
        for (i, px) in rgb.chunks_exact(3).enumerate() {
            for c in 0..3 {
                data[c * n + i] = f64::from(px[c]) / 255.0;
            }
        }
        PlanarImage::new(3, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }
}

impl From<&CoordinateMap> for PlanarImage {
    fn from(cm: &CoordinateMap) -> Self {
        PlanarImage {
            channels: CoordinateMap::CHANNELS,
            height: cm.height(),
            width: cm.width(),
            data: cm.as_planar().to_vec(),
        }
    }
}

/// Dense `height x width x channels` features, channel-last.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 || data.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {height}x{width}x{channels} feature map",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature map"));
        }
        Ok(FeatureMap {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        FeatureMap {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `(height, width, channels)`.
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    /// Number of spatial positions, `height * width`.
    pub fn positions(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Channel vector at flattened position `p = y * width + x`.
    pub fn at(&self, p: usize) -> &[f64] {
        &self.data[p * self.channels..(p + 1) * self.channels]
    }

    pub fn at_mut(&mut self, p: usize) -> &mut [f64] {
        &mut self.data[p * self.channels..(p + 1) * self.channels]
    }

    fn from_planar(channels: usize, height: usize, width: usize, planar: &[f64]) -> Self {
        let mut data = vec![0.0; planar.len()];
        for c in 0..channels {
            for p in 0..height * width {
                data[p * channels + c] = planar[c * height * width + p];
            }
        }
        FeatureMap {
            height,
            width,
            channels,
            data,
        }
    }

    fn to_planar(&self) -> Vec<f64> {
        let n = self.positions();
        let mut planar = vec![0.0; self.data.len()];
        for p in 0..n {
            for c in 0..self.channels {
                planar[c * n + p] = self.data[p * self.channels + c];
            }
        }
        planar
    }
}

/// Weights of the two convolutions. Also used to hold their gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub conv1: Conv2d,
    pub conv2: Conv2d,
}

impl EncoderParams {
    pub fn zeros(out_channels: usize) -> Self {
        EncoderParams {
            conv1: Conv2d::zeros(INPUT_CHANNELS, HIDDEN_CHANNELS),
            conv2: Conv2d::zeros(HIDDEN_CHANNELS, out_channels),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.conv2.out_channels
    }

    /// Total number of scalars, in declaration order
    /// (conv1 weight, conv1 bias, conv2 weight, conv2 bias).
    pub fn len(&self) -> usize {
        self.conv1.weight.len() + self.conv1.bias.len() + self.conv2.weight.len() + self.conv2.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mutable views of the four tensors in declaration order.
    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [
            &mut self.conv1.weight,
            &mut self.conv1.bias,
            &mut self.conv2.weight,
            &mut self.conv2.bias,
        ]
    }

    pub fn tensors(&self) -> [&Vec<f64>; 4] {
        [&self.conv1.weight, &self.conv1.bias, &self.conv2.weight, &self.conv2.bias]
    }

    /// Scalar at flat index `i` across all tensors.
    pub fn flat(&self, mut i: usize) -> f64 {
        for t in self.tensors() {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("parameter index out of range");
    }

    pub fn flat_mut(&mut self, mut i: usize) -> &mut f64 {
        for t in self.tensors_mut() {
            if i < t.len() {
                return &mut t[i];
            }
            i -= t.len();
        }
        panic!("parameter index out of range");
    }

    fn check(&self) -> Result<()> {
        let ok = self.conv1.in_channels == INPUT_CHANNELS
            && self.conv1.out_channels == HIDDEN_CHANNELS
            && self.conv2.in_channels == HIDDEN_CHANNELS
            && self.conv2.out_channels >= 1
            && self.conv1.weight.len() == HIDDEN_CHANNELS * self.conv1.fan_in()
            && self.conv1.bias.len() == HIDDEN_CHANNELS
            && self.conv2.weight.len() == self.conv2.out_channels * self.conv2.fan_in()
            && self.conv2.bias.len() == self.conv2.out_channels;
        if !ok {
            return Err(Error::ShapeMismatch("encoder parameters do not fit the architecture".into()));
        }
        if self.tensors().iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("encoder parameters"));
        }
        Ok(())
    }
}

/// Seeded initialization: weights uniform in `±1/sqrt(fan_in)`, biases zero.
/// The stream is ChaCha8, so the result is the same on every platform.
pub fn init_params(seed: u64, out_channels: usize) -> Result<EncoderParams> {
    if out_channels == 0 {
        return Err(Error::ShapeMismatch("encoder needs at least one output channel".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = EncoderParams::zeros(out_channels);
    for conv in [&mut params.conv1, &mut params.conv2] {
        let bound = 1.0 / (conv.fan_in() as f64).sqrt();
        for w in conv.weight.iter_mut() {
            *w = rng.gen_range(-bound..bound);
        }
    }
    Ok(params)
}

fn check_input(input: &PlanarImage) -> Result<()> {
    if input.channels != INPUT_CHANNELS {
        return Err(Error::BadChannels {
            expected: INPUT_CHANNELS,
            found: input.channels,
        });
    }
    if input.height < MIN_EXTENT || input.width < MIN_EXTENT {
        return Err(Error::TooSmall(format!(
            "encoder input must be at least {MIN_EXTENT}x{MIN_EXTENT}, got {}x{}",
            input.height, input.width
        )));
    }
    Ok(())
}

/// Spatial size of the encoder output for an `h x w` input.
pub fn output_extent(h: usize, w: usize) -> (usize, usize) {
    (out_size(out_size(h)), out_size(out_size(w)))
}

struct Trace {
    pre1: Vec<f64>,
    act1: Vec<f64>,
    h1: usize,
    w1: usize,
}

fn forward(input: &PlanarImage, params: &EncoderParams) -> (Trace, Vec<f64>) {
    let (h1, w1) = (out_size(input.height), out_size(input.width));
    let pre1 = params.conv1.forward(&input.data, input.height, input.width);
    let act1: Vec<f64> = pre1.iter().map(|&v| v.max(0.0)).collect();
    let out = params.conv2.forward(&act1, h1, w1);
    (Trace { pre1, act1, h1, w1 }, out)
}

/// Encodes a coordinate map or RGB image.
pub fn encode(input: &PlanarImage, params: &EncoderParams) -> Result<FeatureMap> {
    check_input(input)?;
    params.check()?;
    let (_, out) = forward(input, params);
    let (ho, wo) = output_extent(input.height, input.width);
    Ok(FeatureMap::from_planar(params.out_channels(), ho, wo, &out))
}

/// Gradients of `<upstream, encode(input)>` with respect to the parameters
/// and the input.
pub fn encode_backward(
    input: &PlanarImage,
    params: &EncoderParams,
    upstream: &FeatureMap,
) -> Result<(EncoderParams, PlanarImage)> {
    check_input(input)?;
    params.check()?;
    let (ho, wo) = output_extent(input.height, input.width);
    if upstream.shape() != (ho, wo, params.out_channels()) {
        return Err(Error::ShapeMismatch(format!(
            "upstream gradient is {:?}, encoder output is {:?}",
            upstream.shape(),
            (ho, wo, params.out_channels())
        )));
    }
    let (trace, _) = forward(input, params);
    let mut grads = EncoderParams::zeros(params.out_channels());
    let dact1 = params
        .conv2
        .backward(&trace.act1, trace.h1, trace.w1, &upstream.to_planar(), &mut grads.conv2);
    let dpre1: Vec<f64> = dact1
        .iter()
        .zip(&trace.pre1)
        .map(|(&g, &z)| if z > 0.0 { g } else { 0.0 })
        .collect();
    let dinput = params
        .conv1
        .backward(&input.data, input.height, input.width, &dpre1, &mut grads.conv1);
    let dinput = PlanarImage {
        channels: input.channels,
        height: input.height,
        width: input.width,
        data: dinput,
    };
    Ok((grads, dinput))
}

/// ReLU activation pattern of the hidden layer, for detecting kinks when
/// comparing against finite differences.
pub fn hidden_activation_pattern(input: &PlanarImage, params: &EncoderParams) -> Vec<bool> {
    let (trace, _) = forward(input, params);
    trace.pre1.iter().map(|&z| z > 0.0).collect()
}

/// Result of [`normalize_coordinate_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub map: CoordinateMap,
    /// Channels with zero variance, passed through untouched.
    pub constant: [bool; 3],
}

/// Per-channel standardization to zero mean and unit (population) variance.
pub fn normalize_coordinate_map(cm: &CoordinateMap) -> Result<Standardized> {
    let n = cm.width() * cm.height();
    if n < 2 {
        return Err(Error::TooSmall("standardization needs at least two points".into()));
    }
    let mut data = Vec::with_capacity(3 * n);
    let mut constant = [false; 3];
    for (c, flag) in constant.iter_mut().enumerate() {
        let ch = cm.channel(c);
        let mean = ch.iter().sum::<f64>() / n as f64;
        let var = ch.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        if var > 0.0 && ch.iter().any(|&v| v != ch[0]) {
            let sd = var.sqrt();
            data.extend(ch.iter().map(|v| (v - mean) / sd));
        } else {
            *flag = true;
            data.extend_from_slice(ch);
        }
    }
    Ok(Standardized {
        map: CoordinateMap::from_planar(cm.width(), cm.height(), data)?,
        constant,
    })
}
