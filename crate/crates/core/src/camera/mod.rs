//! Pinhole camera model.
//!
//! Pixel `(u, v)` is column `u`, row `v`, zero-based, addressing pixel
//! centers. A pixel with depth `d` back-projects to
//! `(d (u - cx) / fx, d (v - cy) / fy, d)` in the camera frame.

pub mod config;

use rayon::prelude::*;

use crate::cloud::PseudoPointCloud;
use crate::depth::{DepthKind, DepthMap};
use crate::error::{Error, Result};

const PAR_ROWS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        let k = CameraIntrinsics { fx, fy, cx, cy };
        k.validate()?;
        Ok(k)
    }

    /// Principal point at the image center, `((w - 1) / 2, (h - 1) / 2)`.
    pub fn centered(fx: f64, fy: f64, width: usize, height: usize) -> Result<Self> {
        CameraIntrinsics::new(fx, fy, center(width), center(height))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0) {
            return Err(Error::InvalidIntrinsics(format!("fx must be positive and finite, got {}", self.fx)));
        }
        if !(self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::InvalidIntrinsics(format!("fy must be positive and finite, got {}", self.fy)));
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err(Error::InvalidIntrinsics("principal point must be finite".into()));
        }
        Ok(())
    }

    /// The 3x3 matrix `K`, row-major.
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
    }

    /// Camera-frame point for pixel `(u, v)` at depth `d`.
    #[inline]
    pub fn unproject_pixel(&self, u: f64, v: f64, d: f64) -> [f64; 3] {
        [d * (u - self.cx) / self.fx, d * (v - self.cy) / self.fy, d]
    }
}

fn center(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

/// Back-projects every pixel of an inverted or metric depth map. The output
/// keeps the input grid: point `(v, u)` comes from pixel `(v, u)`. Zero-depth
/// pixels land on the camera center and are kept.
pub fn backproject(depth: &DepthMap, k: &CameraIntrinsics) -> Result<PseudoPointCloud> {
    k.validate()?;
    match depth.kind() {
        DepthKind::Inverted | DepthKind::Metric => {}
        found => {
            return Err(Error::WrongKind {
                expected: "inverted or metric",
                found,
            })
        }
    }
    let width = depth.width();
    let mut points = vec![[0.0; 3]; depth.len()];
    let fill_row = |(v, row): (usize, &mut [[f64; 3]])| {
        let src = &depth.values()[v * width..(v + 1) * width];
        for (u, (p, &d)) in row.iter_mut().zip(src).enumerate() {
            *p = k.unproject_pixel(u as f64, v as f64, d);
        }
    };
    if depth.height() >= PAR_ROWS {
        points.par_chunks_mut(width).enumerate().for_each(fill_row);
    } else {
        points.chunks_mut(width).enumerate().for_each(fill_row);
    }
    PseudoPointCloud::new(width, depth.height(), points, None)
}

/// Per-pixel `(u, v, depth)` produced by [`project`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedGrid {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

/// Projects each point of the cloud back to the image plane.
pub fn project(cloud: &PseudoPointCloud, k: &CameraIntrinsics) -> Result<ProjectedGrid> {
    k.validate()?;
    let bad: Vec<usize> = cloud
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| p[2].is_nan() || p[2] <= 0.0)
        .map(|(i, _)| i)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveDepth { indices: bad });
    }
    let pixels = cloud
        .points()
        .iter()
        .map(|&[x, y, z]| [k.fx * x / z + k.cx, k.fy * y / z + k.cy, z])
        .collect();
    Ok(ProjectedGrid {
        width: cloud.width(),
        height: cloud.height(),
        pixels,
    })
}

/// Intrinsics from horizontal (and optionally vertical) field of view.
/// Without `fov_y_deg`, pixels are square (`fy = fx`). Lens distortion is
/// ignored.
pub fn estimate_intrinsics_from_fov(
    fov_x_deg: f64,
    width: usize,
    height: usize,
    fov_y_deg: Option<f64>,
) -> Result<CameraIntrinsics> {
    let check = |fov: f64| {
        if fov.is_finite() && fov > 0.0 && fov < 180.0 {
            Ok(fov)
        } else {
            Err(Error::InvalidFov(fov))
        }
    };
    if width == 0 || height == 0 {
        return Err(Error::InvalidIntrinsics(format!(
            "image size must be positive, got {width}x{height}"
        )));
    }
    let focal = |fov: f64, extent: usize| (extent as f64 / 2.0) / (fov.to_radians() / 2.0).tan();
    let fx = focal(check(fov_x_deg)?, width);
    let fy = match fov_y_deg {
        Some(fov_y) => focal(check(fov_y)?, height),
        None => fx,
    };
    CameraIntrinsics::centered(fx, fy, width, height)
}
