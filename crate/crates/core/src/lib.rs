//! Pseudo point clouds from monocular relative depth.
//!
//! The pipeline turns an affine-ambiguous relative depth prediction into a
//! normalized, inverted depth map, back-projects it through a pinhole camera
//! into a grid-structured point cloud, encodes that cloud with a small
//! convolutional stem and fuses the result with image features. A
//! behavior-cloning loss scores action predictions.
//!
//! ```
//! use pseudo3d::{backproject, pipeline_relative_to_dr, CameraIntrinsics, DepthKind, DepthMap};
//!
//! let pred = DepthMap::new(2, 2, vec![0.5, 1.0, 1.5, 2.0], DepthKind::PredictedRelative)?;
//! let dr = pipeline_relative_to_dr(&pred)?;
//! let cloud = backproject(&dr, &CameraIntrinsics::centered(100.0, 100.0, 2, 2)?)?;
//! assert_eq!(cloud.len(), 4);
//! # Ok::<(), pseudo3d::Error>(())
//! ```

pub mod camera;
pub mod cloud;
pub mod depth;
pub mod encoder;
mod error;
pub mod fusion;
pub mod loss;
pub mod oracle;
pub mod verify;

pub use camera::config::IntrinsicsConfig;
pub use camera::{backproject, estimate_intrinsics_from_fov, project, CameraIntrinsics, ProjectedGrid};
pub use cloud::{
    distance_ratio_spread, export_ply, import_ply, local_continuity, to_coordinate_map, Continuity, CoordinateMap,
    PseudoPointCloud,
};
pub use depth::{
    disparity_from_metric, invert, naive_reciprocal, normalize, pipeline_relative_to_dr, DepthKind, DepthMap,
};
pub use encoder::{encode, encode_backward, init_params, EncoderParams, FeatureMap, PlanarImage};
pub use error::{Error, Result};
pub use fusion::bench::{fusion_bench, BenchReport};
pub use fusion::{fuse, FusionParams, Strategy};
pub use loss::{dataset_loss, step_loss, Action, StepLoss};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/depth.md")]
    mod depth {}
    #[doc = include_str!("../../../book/src/camera.md")]
    mod camera {}
    #[doc = include_str!("../../../book/src/cloud.md")]
    mod cloud {}
    #[doc = include_str!("../../../book/src/encoder.md")]
    mod encoder {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/loss.md")]
    mod loss {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
}
