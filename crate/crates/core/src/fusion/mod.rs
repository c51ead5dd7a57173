//! Cross-modal fusion of 2D appearance features with 3D geometric features.
//!
//! Four strategies, all taking two `H' x W' x C` maps and returning one:
//!
//! - **add**: elementwise sum.
//! - **concat**: channel concatenation `[f2d, f3d]` followed by a 1x1
//!   convolution from `2C` back to `C`.
//! - **xattn**: multi-head cross-attention, queries from `f2d`, keys and
//!   values from `f3d`, with a residual: `f2d + MHCA(f2d, f3d, f3d)`.
//! - **sattn**: one pre-norm transformer encoder layer over the sequence
//!   `[f2d positions, f3d positions]`; the first `H' W'` outputs are kept.

pub mod bench;
pub mod layers;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoder::FeatureMap;
use crate::error::{Error, Result};
pub use bench::{fusion_bench, BenchEntry, BenchReport};
use layers::{FeedForward, LayerNorm, Linear, MultiHeadAttention};

pub const DEFAULT_HEADS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Add,
    Concat,
    #[serde(rename = "xattn")]
    CrossAttention,
    #[serde(rename = "sattn")]
    SelfAttention,
}

impl Strategy {
    /// Report order.
    pub const ALL: [Strategy; 4] = [
        Strategy::Add,
        Strategy::Concat,
        Strategy::CrossAttention,
        Strategy::SelfAttention,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Add => "add",
            Strategy::Concat => "concat",
            Strategy::CrossAttention => "xattn",
            Strategy::SelfAttention => "sattn",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown fusion strategy {s:?} (add|concat|xattn|sattn)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FusionParams {
    Add,
    Concat {
        /// `2C -> C`; input columns `0..C` see `f2d`, `C..2C` see `f3d`.
        projection: Linear,
    },
    CrossAttention {
        attention: MultiHeadAttention,
    },
    SelfAttention {
        attention: MultiHeadAttention,
        norm1: LayerNorm,
        norm2: LayerNorm,
        feed_forward: FeedForward,
    },
}

impl FusionParams {
    pub fn strategy(&self) -> Strategy {
        match self {
            FusionParams::Add => Strategy::Add,
            FusionParams::Concat { .. } => Strategy::Concat,
            FusionParams::CrossAttention { .. } => Strategy::CrossAttention,
            FusionParams::SelfAttention { .. } => Strategy::SelfAttention,
        }
    }

    /// Seeded parameters for `channels`-wide features. `heads` matters only
    /// for the attention strategies.
    pub fn init(strategy: Strategy, channels: usize, heads: usize, seed: u64) -> Result<Self> {
        if channels == 0 {
            return Err(Error::ShapeMismatch("fusion needs at least one channel".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let attention = |rng: &mut ChaCha8Rng| -> Result<MultiHeadAttention> {
            check_heads(channels, heads)?;
            Ok(MultiHeadAttention::random(channels, heads, rng))
        };
        Ok(match strategy {
            Strategy::Add => FusionParams::Add,
            Strategy::Concat => FusionParams::Concat {
                projection: Linear::random(2 * channels, channels, &mut rng),
            },
            Strategy::CrossAttention => FusionParams::CrossAttention {
                attention: attention(&mut rng)?,
            },
            Strategy::SelfAttention => FusionParams::SelfAttention {
                attention: attention(&mut rng)?,
                norm1: LayerNorm::new(channels),
                norm2: LayerNorm::new(channels),
                feed_forward: FeedForward::random(channels, &mut rng),
            },
        })
    }
}

fn check_heads(channels: usize, heads: usize) -> Result<()> {
    if heads == 0 || !channels.is_multiple_of(heads) {
        return Err(Error::BadHeadCount { channels, heads });
    }
    Ok(())
}

fn check_pair(f2d: &FeatureMap, f3d: &FeatureMap) -> Result<()> {
    if f2d.shape() != f3d.shape() {
        return Err(Error::ShapeMismatch(format!(
            "2D features are {:?}, 3D features are {:?}",
            f2d.shape(),
            f3d.shape()
        )));
    }
    Ok(())
}

fn wrong(expected: Strategy, params: &FusionParams) -> Error {
    Error::WrongStrategy {
        expected: expected.name(),
        found: params.strategy().name(),
    }
}

fn check_attention(attention: &MultiHeadAttention, channels: usize) -> Result<()> {
    check_heads(channels, attention.heads)?;
    if attention.dim() != channels {
        return Err(Error::ShapeMismatch(format!(
            "attention width {} for {channels}-channel features",
            attention.dim()
        )));
    }
    if !attention.is_finite() {
        return Err(Error::NonFinite("attention parameters"));
    }
    Ok(())
}

fn rebuild(like: &FeatureMap, data: Vec<f64>) -> Result<FeatureMap> {
    FeatureMap::new(like.height(), like.width(), like.channels(), data)
}

pub fn fuse_add(f2d: &FeatureMap, f3d: &FeatureMap) -> Result<FeatureMap> {
    check_pair(f2d, f3d)?;
    let data = f2d.data().iter().zip(f3d.data()).map(|(a, b)| a + b).collect();
    rebuild(f2d, data)
}

pub fn fuse_concat(f2d: &FeatureMap, f3d: &FeatureMap, params: &FusionParams) -> Result<FeatureMap> {
    let FusionParams::Concat { projection } = params else {
        return Err(wrong(Strategy::Concat, params));
    };
    check_pair(f2d, f3d)?;
    let c = f2d.channels();
    if projection.in_dim != 2 * c || projection.out_dim != c {
        return Err(Error::ShapeMismatch(format!(
            "projection is {} -> {}, features need {} -> {c}",
            projection.in_dim,
            projection.out_dim,
            2 * c
        )));
    }
    let mut out = vec![0.0; f2d.data().len()];
    let mut stacked = vec![0.0; 2 * c];
    for p in 0..f2d.positions() {
        stacked[..c].copy_from_slice(f2d.at(p));
        stacked[c..].copy_from_slice(f3d.at(p));
        projection.apply_row(&stacked, &mut out[p * c..(p + 1) * c]);
    }
    rebuild(f2d, out)
}

pub fn fuse_cross_attention(f2d: &FeatureMap, f3d: &FeatureMap, params: &FusionParams) -> Result<FeatureMap> {
    let FusionParams::CrossAttention { attention } = params else {
        return Err(wrong(Strategy::CrossAttention, params));
    };
    check_pair(f2d, f3d)?;
    check_attention(attention, f2d.channels())?;
    let attended = attention.forward(f2d.data(), f3d.data());
    let data = f2d.data().iter().zip(&attended).map(|(a, b)| a + b).collect();
    rebuild(f2d, data)
}

pub fn fuse_self_attention(f2d: &FeatureMap, f3d: &FeatureMap, params: &FusionParams) -> Result<FeatureMap> {
    let FusionParams::SelfAttention {
        attention,
        norm1,
        norm2,
        feed_forward,
    } = params
    else {
        return Err(wrong(Strategy::SelfAttention, params));
    };
    check_pair(f2d, f3d)?;
    let c = f2d.channels();
    check_attention(attention, c)?;
    if norm1.gamma.len() != c || norm2.gamma.len() != c || feed_forward.up.in_dim != c || feed_forward.down.out_dim != c {
        return Err(Error::ShapeMismatch("self-attention layer width does not match features".into()));
    }
    let mut x = Vec::with_capacity(2 * f2d.data().len());
    x.extend_from_slice(f2d.data());
    x.extend_from_slice(f3d.data());

    let normed = norm1.apply(&x);
    let attended = attention.forward(&normed, &normed);
    x.iter_mut().zip(&attended).for_each(|(a, b)| *a += b);

    let ff = feed_forward.apply(&norm2.apply(&x));
    x.iter_mut().zip(&ff).for_each(|(a, b)| *a += b);

    x.truncate(f2d.data().len());
    rebuild(f2d, x)
}

/// Dispatches on the strategy of `params`.
pub fn fuse(f2d: &FeatureMap, f3d: &FeatureMap, params: &FusionParams) -> Result<FeatureMap> {
    match params {
        FusionParams::Add => fuse_add(f2d, f3d),
        FusionParams::Concat { .. } => fuse_concat(f2d, f3d, params),
        FusionParams::CrossAttention { .. } => fuse_cross_attention(f2d, f3d, params),
        FusionParams::SelfAttention { .. } => fuse_self_attention(f2d, f3d, params),
    }
}
