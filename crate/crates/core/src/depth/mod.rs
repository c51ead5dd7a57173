//! Relative-depth processing.
//!
//! A monocular depth model predicts values that are (ideally) an unknown
//! affine function of inverse depth, `d_pred = s / d_gt + t`. Min-max
//! normalization removes both `s` (for `s > 0`) and `t`, and inverting the
//! normalized map restores a positive correlation with distance. The result,
//! `d_r = 1 - normalize(d_pred)`, is what gets back-projected.
//!
//! All arithmetic is `f64`; file readers convert on load.

pub mod io;

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Maps at least this large are processed with rayon.
const PAR_THRESHOLD: usize = 1 << 14;

/// Semantic tag carried by every [`DepthMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum DepthKind {
    /// Raw output of a relative depth model (disparity-like, unitless).
    PredictedRelative,
    /// Min-max normalized into `[0, 1]`.
    Normalized,
    /// `1 - normalized`, positively correlated with distance.
    Inverted,
    /// Positive depth in scene units.
    Metric,
}

impl fmt::Display for DepthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepthKind::PredictedRelative => "predicted-relative",
            DepthKind::Normalized => "normalized",
            DepthKind::Inverted => "inverted",
            DepthKind::Metric => "metric",
        })
    }
}

/// Row-major `height x width` grid of depth-like values.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    kind: DepthKind,
    negative_scale: bool,
}

impl DepthMap {
    /// Builds a map, checking the invariants of `kind`.
    pub fn new(width: usize, height: usize, values: Vec<f64>, kind: DepthKind) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDepthMap(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if values.len() != width * height {
            return Err(Error::InvalidDepthMap(format!(
                "{} values for a {width}x{height} grid",
                values.len()
            )));
        }
        check_finite(&values)?;
        match kind {
            DepthKind::Normalized | DepthKind::Inverted => {
                if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
                    return Err(Error::InvalidDepthMap(format!(
                        "{kind} value {} at index {i} is outside [0, 1]",
                        values[i]
                    )));
                }
            }
            DepthKind::Metric => {
                if let Some(i) = values.iter().position(|&v| v <= 0.0) {
                    return Err(Error::InvalidDepthMap(format!(
                        "metric depth {} at index {i} is not positive",
                        values[i]
                    )));
                }
            }
            DepthKind::PredictedRelative => {}
        }
        Ok(DepthMap {
            width,
            height,
            values,
            kind,
            negative_scale: false,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn kind(&self) -> DepthKind {
        self.kind
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at row `v`, column `u`.
    pub fn get(&self, v: usize, u: usize) -> f64 {
        self.values[v * self.width + u]
    }

    /// Set when the map was synthesized with a negative disparity scale. Such
    /// maps are reflected: normalizing them yields `1 - normalize(d)` of the
    /// positive-scale map.
    pub fn negative_scale(&self) -> bool {
        self.negative_scale
    }

    /// Multiplies every value by `alpha`, keeping the kind (and re-checking
    /// its invariants).
    pub fn scaled(&self, alpha: f64) -> Result<DepthMap> {
        let values = map_values(&self.values, |v| alpha * v);
        DepthMap::new(self.width, self.height, values, self.kind)
    }

    /// Adds `t` to every value, keeping the kind.
    pub fn shifted(&self, t: f64) -> Result<DepthMap> {
        let values = map_values(&self.values, |v| v + t);
        DepthMap::new(self.width, self.height, values, self.kind)
    }

    fn with_values(&self, values: Vec<f64>, kind: DepthKind) -> DepthMap {
        DepthMap {
            width: self.width,
            height: self.height,
            values,
            kind,
            negative_scale: false,
        }
    }

    fn expect_kind(&self, expected: DepthKind, name: &'static str) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: name,
                found: self.kind,
            })
        }
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteInput { index }),
        None => Ok(()),
    }
}

fn map_values(values: &[f64], f: impl Fn(f64) -> f64 + Sync + Send) -> Vec<f64> {
    if values.len() >= PAR_THRESHOLD {
        values.par_iter().map(|&v| f(v)).collect()
    } else {
        values.iter().map(|&v| f(v)).collect()
    }
}

/// Minimum and maximum in one pass. Non-finite values are rejected first.
pub fn min_max(values: &[f64]) -> Result<(f64, f64)> {
    check_finite(values)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    Ok((lo, hi))
}

fn range_of(d: &DepthMap) -> Result<(f64, f64)> {
    let (lo, hi) = min_max(&d.values)?;
    if hi == lo {
        return Err(Error::DegenerateDepth { value: lo });
    }
    Ok((lo, hi - lo))
}

/// Min-max normalization of a predicted relative map into `[0, 1]`.
pub fn normalize(d: &DepthMap) -> Result<DepthMap> {
    d.expect_kind(DepthKind::PredictedRelative, "predicted-relative")?;
    let (lo, span) = range_of(d)?;
    let values = map_values(&d.values, |v| (v - lo) / span);
    Ok(d.with_values(values, DepthKind::Normalized))
}

/// `1 - d` for a normalized map. An inverted map is mapped back to
/// normalized, so `invert` is an involution.
pub fn invert(d: &DepthMap) -> Result<DepthMap> {
    let kind = match d.kind {
        DepthKind::Normalized => DepthKind::Inverted,
        DepthKind::Inverted => DepthKind::Normalized,
        found => {
            return Err(Error::WrongKind {
                expected: "normalized",
                found,
            })
        }
    };
    let values = map_values(&d.values, |v| 1.0 - v);
    Ok(d.with_values(values, kind))
}

/// Simulates a relative depth model: `s / d_gt + t` per pixel.
///
/// Negative `s` is accepted and recorded in [`DepthMap::negative_scale`].
pub fn disparity_from_metric(d_gt: &DepthMap, s: f64, t: f64) -> Result<DepthMap> {
    d_gt.expect_kind(DepthKind::Metric, "metric")?;
    if s == 0.0 {
        return Err(Error::ZeroScale);
    }
    if !s.is_finite() || !t.is_finite() {
        return Err(Error::NonFinite("disparity scale/shift"));
    }
    let values = map_values(&d_gt.values, |z| s / z + t);
    check_finite(&values)?;
    let mut out = d_gt.with_values(values, DepthKind::PredictedRelative);
    out.negative_scale = s < 0.0;
    Ok(out)
}

/// `d_r = 1 - normalize(d_pred)` in a single pass. Bitwise equal to
/// `invert(&normalize(d_pred)?)`.
pub fn pipeline_relative_to_dr(d_pred: &DepthMap) -> Result<DepthMap> {
    d_pred.expect_kind(DepthKind::PredictedRelative, "predicted-relative")?;
    let (lo, span) = range_of(d_pred)?;
    let values = map_values(&d_pred.values, |v| 1.0 - (v - lo) / span);
    Ok(d_pred.with_values(values, DepthKind::Inverted))
}

/// Depth taken as the plain reciprocal of the relative prediction, with no
/// normalization. Any shift in the prediction survives as shape distortion.
pub fn naive_reciprocal(d_pred: &DepthMap) -> Result<DepthMap> {
    d_pred.expect_kind(DepthKind::PredictedRelative, "predicted-relative")?;
    check_finite(&d_pred.values)?;
    let bad: Vec<usize> = d_pred
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= 0.0)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveDepth { indices: bad });
    }
    let values = map_values(&d_pred.values, |v| 1.0 / v);
    DepthMap::new(d_pred.width, d_pred.height, values, DepthKind::Metric)
}
