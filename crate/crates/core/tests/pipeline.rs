//! File-to-file runs of the whole pipeline.

use pseudo3d::depth::io::{read_depth_file, write_csv, write_pfm, DepthFormat};
use pseudo3d::{
    backproject, disparity_from_metric, export_ply, import_ply, local_continuity, pipeline_relative_to_dr,
    CameraIntrinsics, DepthKind, DepthMap, IntrinsicsConfig,
};

fn scene() -> DepthMap {
    // a tilted floor with a box on it
    let (w, h) = (12, 9);
    let values = (0..w * h)
        .map(|i| {
            let (u, v) = (i % w, i / w);
            let floor = 2.0 + 0.4 * (h - 1 - v) as f64;
            if (4..8).contains(&u) && (3..6).contains(&v) {
                floor - 0.8
            } else {
                floor
            }
        })
        .collect();
    DepthMap::new(w, h, values, DepthKind::Metric).unwrap()
}

fn cloud_from_file(path: &std::path::Path, format: DepthFormat, k: &CameraIntrinsics) -> pseudo3d::PseudoPointCloud {
    let pred = read_depth_file(path, format, DepthKind::PredictedRelative).unwrap();
    backproject(&pipeline_relative_to_dr(&pred).unwrap(), k).unwrap()
}

#[test]
fn affine_variants_give_the_same_ply() {
    let dir = tempfile::tempdir().unwrap();
    let gt = scene();
    let k: IntrinsicsConfig = "fov_x_deg = 70".parse().unwrap();
    let k = k.resolve(gt.width(), gt.height()).unwrap();

    let mut clouds = Vec::new();
    for (i, (s, t)) in [(1.0, 0.0), (0.1, -5.0), (10.0, 5.0)].into_iter().enumerate() {
        let pred = disparity_from_metric(&gt, s, t).unwrap();
        let path = dir.path().join(format!("pred{i}.csv"));
        write_csv(std::fs::File::create(&path).unwrap(), &pred).unwrap();
        let cloud = cloud_from_file(&path, DepthFormat::Csv, &k);
        let ply = dir.path().join(format!("cloud{i}.ply"));
        export_ply(&cloud, &ply).unwrap();
        clouds.push(import_ply(&ply).unwrap());
    }
    for c in &clouds[1..] {
        assert_eq!((c.width(), c.height()), (12, 9));
        for (p, q) in c.points().iter().zip(clouds[0].points()) {
            for ch in 0..3 {
                // both sides were rounded to f32 on export
                assert!((p[ch] - q[ch]).abs() <= 1e-6 * q[ch].abs().max(1.0));
            }
        }
    }
}

#[test]
fn pfm_and_csv_inputs_agree_up_to_f32() {
    let dir = tempfile::tempdir().unwrap();
    let pred = disparity_from_metric(&scene(), 1.0, 0.0).unwrap();
    let k = CameraIntrinsics::centered(10.0, 10.0, pred.width(), pred.height()).unwrap();
    let csv = dir.path().join("p.csv");
    let pfm = dir.path().join("p.pfm");
    write_csv(std::fs::File::create(&csv).unwrap(), &pred).unwrap();
    write_pfm(std::fs::File::create(&pfm).unwrap(), &pred).unwrap();
    let a = cloud_from_file(&csv, DepthFormat::Csv, &k);
    let b = cloud_from_file(&pfm, DepthFormat::Pfm, &k);
    let worst = a
        .points()
        .iter()
        .zip(b.points())
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] - q[c]).abs()))
        .fold(0.0, f64::max);
    assert!(worst < 1e-5, "{worst}");
}

#[test]
fn box_edges_show_up_as_continuity_peaks() {
    let gt = scene();
    let k = CameraIntrinsics::centered(10.0, 10.0, gt.width(), gt.height()).unwrap();
    let cloud = backproject(&gt, &k).unwrap();
    let c = local_continuity(&cloud).unwrap();
    // the step of 0.8 in depth dominates any in-surface gap
    assert!(c.max >= 0.8);
    assert!(c.mean < 0.5);
}
