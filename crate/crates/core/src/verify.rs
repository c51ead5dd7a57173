//! Self-checking property suites.
//!
//! Every property generates its own inputs from the seed and compares the
//! library against a closed form or a reference implementation at a fixed
//! tolerance. The text report contains no timings, so equal seeds give
//! byte-identical reports.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::{backproject, project, CameraIntrinsics};
use crate::cloud::{distance_ratio_spread, read_ply, synth_wedge, write_ply, PseudoPointCloud};
use crate::depth::io::{read_csv, read_pfm, read_pgm, write_csv, write_pfm, write_pgm};
use crate::depth::{disparity_from_metric, naive_reciprocal, normalize, pipeline_relative_to_dr, DepthKind, DepthMap};
use crate::encoder::{self, encode, encode_backward, init_params, EncoderParams, FeatureMap, PlanarImage};
use crate::error::{Error, Result};
use crate::fusion::layers::Linear;
use crate::fusion::{fuse, fuse_add, fuse_concat, FusionParams, Strategy, DEFAULT_HEADS};
use crate::loss::{dataset_loss, step_loss, Action, Trajectory};
use crate::oracle;

pub const AFFINE_TOL: f64 = 1e-9;
pub const AFFINE_SCENES: usize = 50;
pub const AFFINE_SCALES: [f64; 3] = [0.1, 1.0, 10.0];
pub const AFFINE_SHIFTS: [f64; 3] = [-5.0, 0.0, 5.0];
pub const SHIFT_T: f64 = 2.0;
pub const SHIFT_MIN_DISTORTION: f64 = 1e-3;
pub const SHIFT_PIPELINE_TOL: f64 = 1e-9;
pub const ROUNDTRIP_TOL: f64 = 1e-9;
pub const ROUNDTRIP_PAIRS: usize = 100;
pub const EQUIVARIANCE_TOL: f64 = 1e-12;
pub const EQUIVARIANCE_ALPHAS: [f64; 2] = [0.5, 2.0];
pub const GRAD_STEP: f64 = 1e-4;
pub const GRAD_REL_TOL: f64 = 1e-4;
pub const GRAD_COORDS: usize = 100;
/// Denominator floor for the relative error, so coordinates whose true
/// gradient is (near) zero are judged on absolute error.
pub const GRAD_REL_FLOOR: f64 = 1e-8;
pub const FUSION_TOL: f64 = 1e-12;
pub const LOSS_TOL: f64 = 1e-12;
pub const LOSS_DATASETS: usize = 20;
pub const PERFECT_LOSS_MAX: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Affine,
    Reflection,
    Shift,
    Roundtrip,
    Equivariance,
    Gradcheck,
    Fusion,
    Loss,
    Files,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::Affine,
        Property::Reflection,
        Property::Shift,
        Property::Roundtrip,
        Property::Equivariance,
        Property::Gradcheck,
        Property::Fusion,
        Property::Loss,
        Property::Files,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Affine => "affine",
            Property::Reflection => "reflection",
            Property::Shift => "shift",
            Property::Roundtrip => "roundtrip",
            Property::Equivariance => "equivariance",
            Property::Gradcheck => "gradcheck",
            Property::Fusion => "fusion",
            Property::Loss => "loss",
            Property::Files => "files",
        }
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Property::ALL.iter().map(|p| p.name()).collect();
                Error::Config(format!("unknown property {s:?} (one of {})", names.join(", ")))
            })
    }
}

/// Parses a comma separated property list.
pub fn parse_props(list: &str) -> Result<Vec<Property>> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// `None` runs everything.
    pub props: Option<Vec<Property>>,
    /// Negative control: add the shift after normalizing instead of before,
    /// which must make the affine check fail.
    pub break_shift: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Measurement {
    pub name: &'static str,
    pub value: f64,
    /// `"<="`, `">="` or `">"`.
    pub relation: &'static str,
    pub bound: f64,
}

impl Measurement {
    fn at_most(name: &'static str, value: f64, bound: f64) -> Self {
        Measurement {
            name,
            value,
            relation: "<=",
            bound,
        }
    }

    fn at_least(name: &'static str, value: f64, bound: f64) -> Self {
        Measurement {
            name,
            value,
            relation: ">=",
            bound,
        }
    }

    fn above(name: &'static str, value: f64, bound: f64) -> Self {
        Measurement {
            name,
            value,
            relation: ">",
            bound,
        }
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            "<=" => self.value <= self.bound,
            ">=" => self.value >= self.bound,
            _ => self.value > self.bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PropertyResult {
    pub property: Property,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    /// Set when the check could not run at all.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, property: Property) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.property == property)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("verify seed={}\n", self.seed);
        for r in &self.results {
            let _ = write!(
                out,
                "property={} status={}",
                r.property.name(),
                if r.passed { "pass" } else { "FAIL" }
            );
            for m in &r.measurements {
                let _ = write!(out, " {}={:e}{}{:e}", m.name, m.value, m.relation, m.bound);
            }
            if let Some(e) = &r.error {
                let _ = write!(out, " error={e:?}");
            }
            out.push('\n');
        }
        let passed = self.results.iter().filter(|r| r.passed).count();
        let _ = writeln!(out, "summary passed={passed} failed={}", self.results.len() - passed);
        out
    }
}

/// Runs the selected properties in canonical order.
pub fn run(opts: &VerifyOptions) -> VerifyReport {
    let selected: Vec<Property> = Property::ALL
        .into_iter()
        .filter(|p| opts.props.as_ref().is_none_or(|sel| sel.contains(p)))
        .collect();
    let results = selected
        .into_iter()
        .map(|property| {
            // each property gets its own stream so subsets reproduce full runs
            let seed = opts.seed ^ (property as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            match check(property, &mut rng, opts) {
                Ok(measurements) => PropertyResult {
                    property,
                    passed: measurements.iter().all(Measurement::holds),
                    measurements,
                    error: None,
                },
                Err(e) => PropertyResult {
                    property,
                    passed: false,
                    measurements: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    VerifyReport { seed: opts.seed, results }
}

fn check(property: Property, rng: &mut ChaCha8Rng, opts: &VerifyOptions) -> Result<Vec<Measurement>> {
    match property {
        Property::Affine => check_affine(rng, opts.break_shift),
        Property::Reflection => check_reflection(rng),
        Property::Shift => check_shift(),
        Property::Roundtrip => check_roundtrip(rng),
        Property::Equivariance => check_equivariance(rng),
        Property::Gradcheck => check_gradients(rng),
        Property::Fusion => check_fusion(rng),
        Property::Loss => check_loss(rng),
        Property::Files => check_files(rng),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cloud_diff(a: &PseudoPointCloud, b: &PseudoPointCloud) -> f64 {
    a.points()
        .iter()
        .zip(b.points())
        .flat_map(|(p, q)| (0..3).map(move |c| (p[c] - q[c]).abs()))
        .fold(0.0, f64::max)
}

/// Random metric scene with depths in `[0.5, 20)`.
pub fn random_metric_scene(rng: &mut impl Rng, width: usize, height: usize) -> Result<DepthMap> {
    let values = (0..width * height).map(|_| rng.gen_range(0.5..20.0)).collect();
    DepthMap::new(width, height, values, DepthKind::Metric)
}

fn check_affine(rng: &mut ChaCha8Rng, break_shift: bool) -> Result<Vec<Measurement>> {
    let mut worst = 0.0f64;
    for _ in 0..AFFINE_SCENES {
        let (w, h) = (rng.gen_range(2..24), rng.gen_range(2..24));
        let gt = random_metric_scene(rng, w, h)?;
        let reference = normalize(&disparity_from_metric(&gt, 1.0, 0.0)?)?;
        for s in AFFINE_SCALES {
            for t in AFFINE_SHIFTS {
                let candidate: Vec<f64> = if break_shift {
                    normalize(&disparity_from_metric(&gt, s, 0.0)?)?
                        .values()
                        .iter()
                        .map(|v| v + t)
                        .collect()
                } else {
                    normalize(&disparity_from_metric(&gt, s, t)?)?.into_values()
                };
                worst = worst.max(max_abs_diff(&candidate, reference.values()));
            }
        }
    }
    Ok(vec![Measurement::at_most("max_dev", worst, AFFINE_TOL)])
}

fn check_reflection(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let gt = random_metric_scene(rng, 8, 6)?;
        let s = rng.gen_range(0.1..10.0);
        let t = rng.gen_range(-5.0..5.0);
        let dr_neg = pipeline_relative_to_dr(&disparity_from_metric(&gt, -s, t)?)?;
        let n_pos = normalize(&disparity_from_metric(&gt, s, t)?)?;
        worst = worst.max(max_abs_diff(dr_neg.values(), n_pos.values()));
    }
    Ok(vec![Measurement::at_most("max_dev", worst, AFFINE_TOL)])
}

/// Wedge used by the shift check: 16x12, depth 1 to 4, 60 degree camera.
pub fn shift_scene() -> Result<(DepthMap, PseudoPointCloud, CameraIntrinsics)> {
    let k = crate::camera::estimate_intrinsics_from_fov(60.0, 16, 12, None)?;
    let (map, cloud) = synth_wedge(&k, 16, 12, 1.0, 4.0)?;
    Ok((map, cloud, k))
}

fn check_shift() -> Result<Vec<Measurement>> {
    let (gt, gt_cloud, k) = shift_scene()?;
    let naive = backproject(&naive_reciprocal(&disparity_from_metric(&gt, 1.0, SHIFT_T)?)?, &k)?;
    let naive_distortion = distance_ratio_spread(&gt_cloud, &naive)?;

    let pipeline = |t: f64| -> Result<PseudoPointCloud> {
        backproject(&pipeline_relative_to_dr(&disparity_from_metric(&gt, 1.0, t)?)?, &k)
    };
    let pipeline_dev = cloud_diff(&pipeline(SHIFT_T)?, &pipeline(0.0)?);

    // adding a constant to depth is not a similarity transform of the cloud
    let shifted = backproject(&gt.shifted(SHIFT_T)?, &k)?;
    let depth_shift_distortion = distance_ratio_spread(&gt_cloud, &shifted)?;

    Ok(vec![
        Measurement::above("naive_ratio_change", naive_distortion, SHIFT_MIN_DISTORTION),
        Measurement::at_most("pipeline_dev", pipeline_dev, SHIFT_PIPELINE_TOL),
        Measurement::above("depth_shift_ratio_change", depth_shift_distortion, 1e-6),
    ])
}

fn random_intrinsics(rng: &mut impl Rng, width: usize, height: usize) -> Result<CameraIntrinsics> {
    CameraIntrinsics::new(
        rng.gen_range(100.0..=2000.0),
        rng.gen_range(100.0..=2000.0),
        rng.gen_range(0.0..width as f64),
        rng.gen_range(0.0..height as f64),
    )
}

fn check_roundtrip(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut pixel_err = 0.0f64;
    let mut depth_err = 0.0f64;
    for _ in 0..ROUNDTRIP_PAIRS {
        let (w, h) = (rng.gen_range(1..20), rng.gen_range(1..20));
        let values = (0..w * h).map(|_| rng.gen_range(1e-3..=1.0)).collect();
        let d = DepthMap::new(w, h, values, DepthKind::Inverted)?;
        let k = random_intrinsics(rng, w, h)?;
        let grid = project(&backproject(&d, &k)?, &k)?;
        for (i, px) in grid.pixels.iter().enumerate() {
            pixel_err = pixel_err.max((px[0] - (i % w) as f64).abs()).max((px[1] - (i / w) as f64).abs());
            depth_err = depth_err.max((px[2] - d.values()[i]).abs());
        }
    }
    Ok(vec![
        Measurement::at_most("pixel_err", pixel_err, ROUNDTRIP_TOL),
        Measurement::at_most("depth_err", depth_err, ROUNDTRIP_TOL),
    ])
}

fn check_equivariance(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut scale_err = 0.0f64;
    let mut grid_err = 0.0f64;
    for _ in 0..20 {
        let (w, h) = (rng.gen_range(1..16), rng.gen_range(1..16));
        let d = random_metric_scene(rng, w, h)?;
        let k = random_intrinsics(rng, w, h)?;
        let base = backproject(&d, &k)?;
        for alpha in EQUIVARIANCE_ALPHAS {
            let scaled = backproject(&d.scaled(alpha)?, &k)?;
            for (p, q) in scaled.points().iter().zip(base.points()) {
                for c in 0..3 {
                    scale_err = scale_err.max((p[c] - alpha * q[c]).abs());
                }
            }
        }
        // every output index must project back onto its own source pixel
        let grid = project(&base, &k)?;
        if (grid.width, grid.height) != (w, h) {
            grid_err = f64::INFINITY;
        }
        for v in 0..h {
            for u in 0..w {
                let px = grid.pixels[v * w + u];
                grid_err = grid_err
                    .max((px[0] - u as f64).abs())
                    .max((px[1] - v as f64).abs())
                    .max((px[2] - d.get(v, u)).abs());
            }
        }
    }
    Ok(vec![
        Measurement::at_most("scale_err", scale_err, EQUIVARIANCE_TOL),
        Measurement::at_most("grid_err", grid_err, ROUNDTRIP_TOL),
    ])
}

/// Central-difference check of [`encode_backward`] on an 8x8 input.
/// Coordinates whose perturbation flips a hidden ReLU are redrawn, since the
/// objective is not differentiable there.
pub fn gradient_check(rng: &mut impl Rng, coords: usize) -> Result<(f64, usize)> {
    let params = init_params(rng.gen(), encoder::DEFAULT_CHANNELS)?;
    let input = PlanarImage::new(3, 8, 8, (0..192).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let (ho, wo) = encoder::output_extent(8, 8);
    let c = params.out_channels();
    let upstream = FeatureMap::new(ho, wo, c, (0..ho * wo * c).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let objective = |p: &EncoderParams| -> Result<f64> {
        let out = encode(&input, p)?;
        Ok(out.data().iter().zip(upstream.data()).map(|(a, b)| a * b).sum())
    };
    let (grads, _) = encode_backward(&input, &params, &upstream)?;
    let pattern = encoder::hidden_activation_pattern(&input, &params);

    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut attempts = 0;
    while checked < coords && attempts < coords * 20 {
        attempts += 1;
        let i = rng.gen_range(0..params.len());
        let (mut plus, mut minus) = (params.clone(), params.clone());
        *plus.flat_mut(i) += GRAD_STEP;
        *minus.flat_mut(i) -= GRAD_STEP;
        if encoder::hidden_activation_pattern(&input, &plus) != pattern
            || encoder::hidden_activation_pattern(&input, &minus) != pattern
        {
            continue;
        }
        let fd = (objective(&plus)? - objective(&minus)?) / (2.0 * GRAD_STEP);
        let an = grads.flat(i);
        let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(GRAD_REL_FLOOR);
        worst = worst.max(rel);
        checked += 1;
    }
    Ok((worst, checked))
}

fn check_gradients(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let (worst, checked) = gradient_check(rng, GRAD_COORDS)?;
    Ok(vec![
        Measurement::at_most("max_rel_err", worst, GRAD_REL_TOL),
        Measurement::at_least("coords", checked as f64, GRAD_COORDS as f64),
    ])
}

fn random_features(rng: &mut impl Rng, h: usize, w: usize, c: usize) -> Result<FeatureMap> {
    FeatureMap::new(h, w, c, (0..h * w * c).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn check_fusion(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let (h, w, c) = (3, 4, 8);
    let f2d = random_features(rng, h, w, c)?;
    let f3d = random_features(rng, h, w, c)?;

    let mut projection = Linear::zeros(2 * c, c);
    for i in 0..c {
        projection.weight[i * 2 * c + i] = 1.0;
        projection.weight[i * 2 * c + c + i] = 1.0;
    }
    let summed = fuse_add(&f2d, &f3d)?;
    let hierarchy = max_abs_diff(fuse_concat(&f2d, &f3d, &FusionParams::Concat { projection })?.data(), summed.data());

    // locality: bump one f3d position
    let target = rng.gen_range(0..h * w);
    let mut bumped = f3d.clone();
    bumped.at_mut(target)[rng.gen_range(0..c)] += 0.5;
    let moved = fuse_add(&f2d, &bumped)?;
    let leaks = (0..h * w).filter(|&p| p != target && summed.at(p) != moved.at(p)).count();
    let hit = usize::from(summed.at(target) != moved.at(target));

    let mut nonlocal = usize::MAX;
    let mut shape_errors = 0usize;
    for strategy in Strategy::ALL {
        let params = FusionParams::init(strategy, c, DEFAULT_HEADS, rng.gen())?;
        let base = fuse(&f2d, &f3d, &params)?;
        if base.shape() != (h, w, c) {
            shape_errors += 1;
        }
        if matches!(strategy, Strategy::CrossAttention | Strategy::SelfAttention) {
            let moved = fuse(&f2d, &bumped, &params)?;
            let spread = (0..h * w).filter(|&p| p != target && base.at(p) != moved.at(p)).count();
            nonlocal = nonlocal.min(spread);
        }
    }

    // small-instance oracles: 2 positions per map, 4 channels, 2 heads
    let a2 = random_features(rng, 1, 2, 4)?;
    let b2 = random_features(rng, 1, 2, 4)?;
    let xattn = FusionParams::init(Strategy::CrossAttention, 4, 2, rng.gen())?;
    let FusionParams::CrossAttention { attention } = &xattn else { unreachable!() };
    let xattn_dev = max_abs_diff(
        fuse(&a2, &b2, &xattn)?.data(),
        &oracle::cross_attention_residual(a2.data(), b2.data(), 4, &oracle::AttentionWeights::of(attention)),
    );
    let sattn = FusionParams::init(Strategy::SelfAttention, 4, 2, rng.gen())?;
    let sattn_dev = max_abs_diff(
        fuse(&a2, &b2, &sattn)?.data(),
        &oracle::self_attention_layer(a2.data(), b2.data(), 4, &oracle::EncoderLayerWeights::of(&sattn)),
    );

    Ok(vec![
        Measurement::at_most("concat_vs_add", hierarchy, FUSION_TOL),
        Measurement::at_most("add_leaks", leaks as f64, 0.0),
        Measurement::above("add_hit", hit as f64, 0.0),
        Measurement::above("attention_spread", nonlocal as f64, 0.0),
        Measurement::at_most("xattn_oracle_dev", xattn_dev, FUSION_TOL),
        Measurement::at_most("sattn_oracle_dev", sattn_dev, FUSION_TOL),
        Measurement::at_most("shape_errors", shape_errors as f64, 0.0),
    ])
}

fn random_action_pair(rng: &mut impl Rng) -> (Action, Action) {
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.iter_mut().for_each(|v| *v /= n);
    let target = Action::new(
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        q,
        if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
    );
    let pred = Action::new(
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        rng.gen_range(0.0..=1.0),
    );
    (pred, target)
}

fn check_loss(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut oracle_dev = 0.0f64;
    for _ in 0..LOSS_DATASETS {
        let n = rng.gen_range(1..5);
        let t = rng.gen_range(1..8);
        let data: Vec<Trajectory> = (0..n).map(|_| (0..t).map(|_| random_action_pair(rng)).collect()).collect();
        let rows: Vec<Vec<_>> = data
            .iter()
            .map(|tr| tr.iter().map(|(p, t)| (p.to_row(), t.to_row())).collect())
            .collect();
        oracle_dev = oracle_dev.max((dataset_loss(&data)? - oracle::flat_loop_loss(&rows)).abs());
    }
    let (_, target) = random_action_pair(rng);
    let perfect = step_loss(&target, &target)?.total;
    let delta = 0.125;
    let pred = Action {
        xyz: [target.xyz[0] + delta, target.xyz[1], target.xyz[2]],
        ..target
    };
    let axis = step_loss(&pred, &target)?.mse_xyz;
    let d = pred.xyz[0] - target.xyz[0];
    let axis_dev = (axis - d * d / 3.0).abs();
    Ok(vec![
        Measurement::at_most("oracle_dev", oracle_dev, LOSS_TOL),
        Measurement::at_most("perfect_loss", perfect, PERFECT_LOSS_MAX),
        Measurement::at_most("delta_dev", axis_dev, 0.0),
    ])
}

/// One ramp in three encodings.
#[derive(Debug, Clone)]
pub struct CrossFormatFixture {
    pub pfm: Vec<u8>,
    pub pgm: Vec<u8>,
    pub csv: Vec<u8>,
    pub expected: DepthMap,
}

/// A 5x3 ramp `i / 16`, stored as 16-bit PGM with `maxval = 1024`,
/// little-endian PFM and CSV. Every sample is exact in all three encodings.
pub fn cross_format_fixture() -> Result<CrossFormatFixture> {
    let (w, h) = (5, 3);
    let raw: Vec<u16> = (0..w * h).map(|i| 64 * i as u16).collect();
    let values = raw.iter().map(|&r| f64::from(r) / 1024.0).collect();
    let map = DepthMap::new(w, h, values, DepthKind::PredictedRelative)?;
    let (mut pgm, mut pfm, mut csv) = (Vec::new(), Vec::new(), Vec::new());
    let io = |e| Error::io("<memory>", e);
    write_pgm(&mut pgm, w, h, &raw, 1024).map_err(io)?;
    write_pfm(&mut pfm, &map).map_err(io)?;
    write_csv(&mut csv, &map).map_err(io)?;
    Ok(CrossFormatFixture {
        pfm,
        pgm,
        csv,
        expected: map,
    })
}

fn check_files(rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut ply_dev = 0.0f64;
    for round in 0..10 {
        let (w, h) = (rng.gen_range(1..10), rng.gen_range(1..10));
        let points: Vec<[f64; 3]> = (0..w * h)
            .map(|_| std::array::from_fn(|_| rng.gen_range(-100.0..100.0)))
            .collect();
        let mut cloud = PseudoPointCloud::new(w, h, points, None)?;
        if round % 2 == 1 {
            cloud = cloud.with_colors((0..w * h).map(|_| rng.gen()).collect())?;
        }
        let mut buf = Vec::new();
        write_ply(&mut buf, &cloud).map_err(|e| Error::io("<memory>", e))?;
        let back = read_ply(&buf)?;
        if (back.width(), back.height()) != (w, h) || back.colors() != cloud.colors() {
            ply_dev = f64::INFINITY;
        }
        for (p, q) in back.points().iter().zip(cloud.points()) {
            for c in 0..3 {
                ply_dev = ply_dev.max((p[c] - f64::from(q[c] as f32)).abs());
            }
        }
    }

    let CrossFormatFixture { pfm, pgm, csv, expected } = cross_format_fixture()?;
    let kind = DepthKind::PredictedRelative;
    let maps = [read_pfm(&pfm, kind)?, read_pgm(&pgm, kind)?, read_csv(&csv, kind)?];
    let mut cross_dev = 0.0f64;
    for m in &maps {
        if (m.width(), m.height()) != (expected.width(), expected.height()) {
            cross_dev = f64::INFINITY;
        } else {
            cross_dev = cross_dev.max(max_abs_diff(m.values(), expected.values()));
        }
    }
    Ok(vec![
        Measurement::at_most("ply_dev", ply_dev, 0.0),
        Measurement::at_most("cross_format_dev", cross_dev, 0.0),
    ])
}
