//! Closed-form synthetic scenes used as back-projection oracles.

use super::PseudoPointCloud;
use crate::camera::CameraIntrinsics;
use crate::depth::{DepthKind, DepthMap};
use crate::error::{Error, Result};

fn scene(k: &CameraIntrinsics, width: usize, height: usize, depth_at: impl Fn(usize) -> f64) -> Result<(DepthMap, PseudoPointCloud)> {
    k.validate()?;
    let mut values = Vec::with_capacity(width * height);
    let mut points = Vec::with_capacity(width * height);
    for v in 0..height {
        for u in 0..width {
            let z = depth_at(u);
            values.push(z);
            points.push([z * (u as f64 - k.cx) / k.fx, z * (v as f64 - k.cy) / k.fy, z]);
        }
    }
    let map = DepthMap::new(width, height, values, DepthKind::Metric)?;
    let cloud = PseudoPointCloud::new(width, height, points, None)?;
    Ok((map, cloud))
}

/// Frontoparallel plane at depth `z0`. Horizontal point spacing is `z0 / fx`,
/// vertical spacing `z0 / fy`.
pub fn synth_plane(k: &CameraIntrinsics, width: usize, height: usize, z0: f64) -> Result<(DepthMap, PseudoPointCloud)> {
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::InvalidDepth(z0));
    }
    scene(k, width, height, |_| z0)
}

/// Depth linear in the column index, `z_near` at `u = 0` to `z_far` at
/// `u = width - 1`. A single-column wedge sits at `z_near`.
pub fn synth_wedge(
    k: &CameraIntrinsics,
    width: usize,
    height: usize,
    z_near: f64,
    z_far: f64,
) -> Result<(DepthMap, PseudoPointCloud)> {
    if !(z_near.is_finite() && z_far.is_finite() && 0.0 < z_near && z_near < z_far) {
        return Err(Error::InvalidRange {
            near: z_near,
            far: z_far,
        });
    }
    let last = width.saturating_sub(1).max(1) as f64;
    scene(k, width, height, |u| z_near + (z_far - z_near) * (u as f64 / last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::backproject;
    use crate::cloud::local_continuity;

    fn unit() -> CameraIntrinsics {
        CameraIntrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn unit_plane_matches_camera_example() {
        let (map, cloud) = synth_plane(&unit(), 2, 2, 1.0).unwrap();
        assert_eq!(map.values(), &[1.0; 4]);
        assert_eq!(
            cloud.points(),
            &[[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]]
        );
    }

    #[test]
    fn plane_closed_forms() {
        let k = CameraIntrinsics::centered(250.0, 400.0, 9, 7).unwrap();
        let z0 = 3.0;
        let (map, cloud) = synth_plane(&k, 9, 7, z0).unwrap();
        assert_eq!(backproject(&map, &k).unwrap(), cloud);
        let xs: Vec<f64> = cloud.points().iter().map(|p| p[0]).collect();
        let extent = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert!((extent - z0 * 8.0 / 250.0).abs() < 1e-12);
        let c = local_continuity(&cloud).unwrap();
        assert!((c.max - z0 / 250.0).abs() < 1e-12);
        assert!(cloud.points().iter().all(|p| p[2] == z0));
    }

    #[test]
    fn plane_with_focal_equal_to_depth_has_unit_gaps() {
        let k = CameraIntrinsics::centered(2.0, 2.0, 4, 4).unwrap();
        let (_, cloud) = synth_plane(&k, 4, 4, 2.0).unwrap();
        let c = local_continuity(&cloud).unwrap();
        assert_eq!((c.mean, c.max), (1.0, 1.0));
    }

    #[test]
    fn wedge_interpolates_linearly() {
        let (map, cloud) = synth_wedge(&unit(), 3, 2, 1.0, 3.0).unwrap();
        assert_eq!(map.get(0, 1), 2.0);
        assert_eq!(map.get(1, 1), 2.0);
        assert_eq!(map.get(0, 2), 3.0);
        assert_eq!(backproject(&map, &unit()).unwrap(), cloud);
    }

    #[test]
    fn wedge_continuity_respects_slope_bound() {
        let (w, h) = (16, 12);
        let (z_near, z_far) = (1.0, 4.0);
        let k = CameraIntrinsics::centered(20.0, 25.0, w, h).unwrap();
        let (_, cloud) = synth_wedge(&k, w, h, z_near, z_far).unwrap();
        // neighbors along u: dZ = slope, dX = (slope (u + 1 - cx) + z(u)) / fx, dY = slope (v - cy) / fy
        let slope = (z_far - z_near) / (w - 1) as f64;
        let du_max = (w as f64 - k.cx).abs().max(k.cx.abs());
        let dv_max = k.cy.abs().max((h as f64 - 1.0 - k.cy).abs());
        let horizontal = ((slope * du_max + z_far) / k.fx).hypot(slope).hypot(slope * dv_max / k.fy);
        let vertical = z_far / k.fy;
        let c = local_continuity(&cloud).unwrap();
        assert!(c.max <= horizontal.max(vertical) + 1e-12, "{} > bound", c.max);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(synth_plane(&unit(), 2, 2, 0.0), Err(Error::InvalidDepth(_))));
        assert!(matches!(synth_wedge(&unit(), 3, 1, 2.0, 2.0), Err(Error::InvalidRange { .. })));
        assert!(matches!(synth_wedge(&unit(), 3, 1, 0.0, 2.0), Err(Error::InvalidRange { .. })));
        assert!(matches!(synth_wedge(&unit(), 3, 1, 3.0, 2.0), Err(Error::InvalidRange { .. })));
    }
}
