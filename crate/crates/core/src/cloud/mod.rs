//! Grid-organized pseudo point clouds.
//!
//! Points keep the layout of the image they came from, so a cloud doubles as
//! a 3-channel image of coordinates ([`CoordinateMap`]) that ordinary 2D
//! convolutions can consume.

pub mod ply;
pub mod synth;

use crate::error::{Error, Result};

pub use ply::{export_ply, import_ply, read_ply, write_ply};
pub use synth::{synth_plane, synth_wedge};

/// Row-major `height x width` grid of camera-frame points, with optional
/// per-point RGB.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPointCloud {
    width: usize,
    height: usize,
    points: Vec<[f64; 3]>,
    colors: Option<Vec<[u8; 3]>>,
}

impl PseudoPointCloud {
    pub fn new(width: usize, height: usize, points: Vec<[f64; 3]>, colors: Option<Vec<[u8; 3]>>) -> Result<Self> {
        if width == 0 || height == 0 || points.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} points for a {width}x{height} grid",
                points.len()
            )));
        }
        if let Some(c) = &colors {
            if c.len() != points.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} colors for {} points",
                    c.len(),
                    points.len()
                )));
            }
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(PseudoPointCloud {
            width,
            height,
            points,
            colors,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    /// Point at row `v`, column `u`.
    pub fn get(&self, v: usize, u: usize) -> [f64; 3] {
        self.points[v * self.width + u]
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != self.points.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} colors for {} points",
                colors.len(),
                self.points.len()
            )));
        }
        self.colors = Some(colors);
        Ok(self)
    }
}

/// Planar `3 x height x width` map: channel 0 holds X, 1 holds Y, 2 holds Z.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl CoordinateMap {
    pub const CHANNELS: usize = 3;

    /// Builds a map from planar data (`3 * width * height` values).
    pub fn from_planar(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != Self::CHANNELS * width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a 3x{height}x{width} coordinate map",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coordinate map"));
        }
        Ok(CoordinateMap { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn as_planar(&self) -> &[f64] {
        &self.data
    }

    pub fn into_planar(self) -> Vec<f64> {
        self.data
    }

    /// Inverse of [`to_coordinate_map`]. Colors are not carried by the map.
    pub fn to_cloud(&self) -> PseudoPointCloud {
        let n = self.width * self.height;
        let points = (0..n)
            .map(|i| [self.data[i], self.data[n + i], self.data[2 * n + i]])
            .collect();
        PseudoPointCloud {
            width: self.width,
            height: self.height,
            points,
            colors: None,
        }
    }
}

/// Rearranges a cloud into its planar X/Y/Z coordinate map.
pub fn to_coordinate_map(cloud: &PseudoPointCloud) -> CoordinateMap {
    let n = cloud.len();
    let mut data = vec![0.0; 3 * n];
    for (i, p) in cloud.points.iter().enumerate() {
        data[i] = p[0];
        data[n + i] = p[1];
        data[2 * n + i] = p[2];
    }
    CoordinateMap {
        width: cloud.width,
        height: cloud.height,
        data,
    }
}

/// Gap statistics over all 4-neighbor point pairs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Continuity {
    pub mean: f64,
    pub max: f64,
    pub pairs: usize,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Euclidean distances between horizontally and vertically adjacent points.
pub fn local_continuity(cloud: &PseudoPointCloud) -> Result<Continuity> {
    if cloud.width < 2 && cloud.height < 2 {
        return Err(Error::TooSmall("continuity needs at least two points".into()));
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    let mut pairs = 0;
    for v in 0..cloud.height {
        for u in 0..cloud.width {
            let p = cloud.get(v, u);
            let right = (u + 1 < cloud.width).then(|| cloud.get(v, u + 1));
            let down = (v + 1 < cloud.height).then(|| cloud.get(v + 1, u));
            for q in right.into_iter().chain(down) {
                let d = distance(p, q);
                sum += d;
                max = max.max(d);
                pairs += 1;
            }
        }
    }
    Ok(Continuity {
        mean: sum / pairs as f64,
        max,
        pairs,
    })
}

/// How far `candidate` is from a uniformly scaled copy of `reference`.
///
/// For every point pair with a non-zero reference distance, takes the ratio
/// of candidate to reference distance; returns `(max - min) / min` over those
/// ratios. Zero means the two clouds have the same shape up to scale.
/// Quadratic in the point count.
pub fn distance_ratio_spread(reference: &PseudoPointCloud, candidate: &PseudoPointCloud) -> Result<f64> {
    if reference.len() != candidate.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} vs {} points",
            reference.len(),
            candidate.len()
        )));
    }
    let (a, b) = (reference.points(), candidate.points());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let dr = distance(a[i], a[j]);
            if dr > 0.0 {
                let ratio = distance(b[i], b[j]) / dr;
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
    }
    if !lo.is_finite() || lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((hi - lo) / lo)
}
