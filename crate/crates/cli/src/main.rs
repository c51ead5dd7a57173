//! `pseudo3d` command-line tool.
//!
//! Exit codes: 0 success, 1 input or config error, 2 property failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use pseudo3d::cloud::{synth_plane, synth_wedge};
use pseudo3d::depth::io::{read_depth_file, write_csv, write_pfm, DepthFormat};
use pseudo3d::depth::min_max;
use pseudo3d::fusion::DEFAULT_HEADS;
use pseudo3d::loss::{pair_actions, read_actions_file, Trajectory};
use pseudo3d::verify::{self, VerifyOptions};
use pseudo3d::{
    backproject, dataset_loss, distance_ratio_spread, export_ply, fusion_bench, local_continuity, naive_reciprocal,
    pipeline_relative_to_dr, step_loss, CameraIntrinsics, DepthKind, DepthMap, IntrinsicsConfig, PseudoPointCloud,
    Strategy,
};

#[derive(Parser)]
#[command(name = "pseudo3d", version, about = "Pseudo point clouds from monocular relative depth")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Depth file to pseudo point cloud (PLY).
    GenCloud {
        #[arg(long)]
        depth: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        intrinsics: PathBuf,
        /// How to interpret the file values.
        #[arg(long, value_enum, default_value_t = Kind::Relative)]
        kind: Kind,
        /// Back-project the plain reciprocal of the relative depth instead of
        /// the normalized inverse.
        #[arg(long, conflicts_with = "kind")]
        naive_reciprocal: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Exports the pipeline and naive-reciprocal clouds of one relative depth
    /// file and reports how far their shapes differ.
    Compare {
        #[arg(long)]
        depth: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        intrinsics: PathBuf,
        #[arg(long)]
        out_pipeline: PathBuf,
        #[arg(long)]
        out_naive: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Runs the self-checking property suites.
    Verify {
        /// Comma separated subset, e.g. `gradcheck,affine`.
        #[arg(long)]
        props: Option<String>,
        #[arg(long, env = "PSEUDO3D_SEED", default_value_t = 0)]
        seed: u64,
        /// Negative control: shift after normalizing.
        #[arg(long)]
        break_shift: bool,
        #[arg(long)]
        json: bool,
    },
    /// Times the fusion strategies on seeded features.
    FuseBench {
        /// Feature shape `HxWxC`.
        #[arg(long, value_parser = parse_shape)]
        shape: (usize, usize, usize),
        /// Strategies to run, in report order by default.
        #[arg(long, value_delimiter = ',')]
        fusion: Vec<Strategy>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_HEADS)]
        heads: usize,
        #[arg(long, env = "PSEUDO3D_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Writes a synthetic metric depth file with a matching reference cloud.
    Synth {
        #[arg(long, value_enum)]
        scene: Scene,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        intrinsics: PathBuf,
        /// Plane depth.
        #[arg(long, default_value_t = 1.0)]
        z0: f64,
        /// Wedge depth at the left edge.
        #[arg(long, default_value_t = 1.0)]
        z_near: f64,
        /// Wedge depth at the right edge.
        #[arg(long, default_value_t = 4.0)]
        z_far: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
        /// Also write the closed-form cloud.
        #[arg(long)]
        oracle_ply: Option<PathBuf>,
    },
    /// Behavior-cloning loss of predicted against target action tables.
    Loss {
        /// Prediction CSV, one per trajectory.
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        /// Target CSV, paired with `--pred` in order.
        #[arg(long, required = true)]
        target: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Pfm,
    Pgm,
    Csv,
}

impl From<Format> for DepthFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Pfm => DepthFormat::Pfm,
            Format::Pgm => DepthFormat::Pgm,
            Format::Csv => DepthFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Affine-ambiguous relative prediction, run through normalize and invert.
    Relative,
    /// Metric depth, back-projected as is.
    Metric,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    Wedge,
    Plane,
}

/// A failure tagged with the pipeline stage it came from.
struct Failure {
    stage: &'static str,
    message: String,
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T, E: std::fmt::Display> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            message: e.to_string(),
        })
    }
}

enum Outcome {
    Done,
    PropertyFailure,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFailure) => ExitCode::from(2),
        Err(f) => {
            eprintln!("error: {} failed: {}", f.stage, f.message);
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::GenCloud {
            depth,
            format,
            intrinsics,
            kind,
            naive_reciprocal: naive,
            out,
            json,
        } => gen_cloud(&depth, format, &intrinsics, kind, naive, &out, json),
        Command::Compare {
            depth,
            format,
            intrinsics,
            out_pipeline,
            out_naive,
            json,
        } => compare(&depth, format, &intrinsics, &out_pipeline, &out_naive, json),
        Command::Verify {
            props,
            seed,
            break_shift,
            json,
        } => {
            let props = props.map(|p| verify::parse_props(&p)).transpose().stage("parse props")?;
            let report = verify::run(&VerifyOptions {
                seed,
                props,
                break_shift,
            });
            if json {
                println!("{}", serde_json::to_string_pretty(&report).stage("report")?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(if report.passed() { Outcome::Done } else { Outcome::PropertyFailure })
        }
        Command::FuseBench {
            shape,
            fusion,
            reps,
            heads,
            seed,
            json,
        } => {
            let strategies = if fusion.is_empty() { Strategy::ALL.to_vec() } else { fusion };
            let report = fusion_bench(seed, seed.wrapping_add(1), shape, heads, reps, &strategies).stage("fusion")?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).stage("report")?);
            } else {
                print!("{}", report.to_text());
            }
            Ok(Outcome::Done)
        }
        Command::Synth {
            scene,
            width,
            height,
            intrinsics,
            z0,
            z_near,
            z_far,
            format,
            out,
            oracle_ply,
        } => {
            let k = load_intrinsics(&intrinsics, width, height)?;
            let (map, cloud) = match scene {
                Scene::Wedge => synth_wedge(&k, width, height, z_near, z_far),
                Scene::Plane => synth_plane(&k, width, height, z0),
            }
            .stage("synthesize")?;
            write_depth(&out, format, &map)?;
            if let Some(path) = &oracle_ply {
                export_ply(&cloud, path).stage("export")?;
            }
            println!("synth width={width} height={height} depth={}", out.display());
            Ok(Outcome::Done)
        }
        Command::Loss { pred, target, json } => loss(&pred, &target, json),
    }
}

fn parse_shape(s: &str) -> Result<(usize, usize, usize), String> {
    let dims: Vec<usize> = s
        .split(['x', 'X'])
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad shape {s:?}: {e}"))?;
    match dims[..] {
        [h, w, c] if h > 0 && w > 0 && c > 0 => Ok((h, w, c)),
        _ => Err(format!("shape must be HxWxC with positive sizes, got {s:?}")),
    }
}

fn load_intrinsics(path: &Path, width: usize, height: usize) -> Result<CameraIntrinsics, Failure> {
    IntrinsicsConfig::from_path(path)
        .and_then(|c| c.resolve(width, height))
        .stage("intrinsics")
}

fn write_depth(path: &Path, format: Format, map: &DepthMap) -> Result<(), Failure> {
    let file = std::fs::File::create(path).stage("write depth")?;
    let mut w = std::io::BufWriter::new(file);
    match format {
        Format::Csv => write_csv(&mut w, map),
        Format::Pfm => write_pfm(&mut w, map),
        Format::Pgm => {
            return Err(Failure {
                stage: "write depth",
                message: "PGM cannot hold metric depth, use csv or pfm".into(),
            })
        }
    }
    .and_then(|()| std::io::Write::flush(&mut w))
    .stage("write depth")
}

fn gen_cloud(
    depth: &Path,
    format: Format,
    intrinsics: &Path,
    kind: Kind,
    naive: bool,
    out: &Path,
    json: bool,
) -> Result<Outcome, Failure> {
    let file_kind = match kind {
        Kind::Relative => DepthKind::PredictedRelative,
        Kind::Metric => DepthKind::Metric,
    };
    let map = read_depth_file(depth, format.into(), file_kind).stage("read depth")?;
    let k = load_intrinsics(intrinsics, map.width(), map.height())?;
    let (mode, dr) = if naive {
        ("naive-reciprocal", naive_reciprocal(&map).stage("naive reciprocal")?)
    } else if kind == Kind::Metric {
        ("metric", map)
    } else {
        ("pipeline", pipeline_relative_to_dr(&map).stage("normalize")?)
    };
    let cloud = backproject(&dr, &k).stage("backproject")?;
    export_ply(&cloud, out).stage("export")?;

    let (lo, hi) = min_max(dr.values()).stage("summary")?;
    let cont = summary_continuity(&cloud)?;
    if json {
        let value = json!({
            "mode": mode,
            "width": cloud.width(),
            "height": cloud.height(),
            "points": cloud.len(),
            "depth_min": lo,
            "depth_max": hi,
            "continuity": cont,
            "out": out,
        });
        println!("{value:#}");
    } else {
        let (mean, max) = cont.map_or((f64::NAN, f64::NAN), |c| (c.mean, c.max));
        println!(
            "gen-cloud mode={mode} width={} height={} points={} depth_min={lo:e} depth_max={hi:e} \
             continuity_mean={mean:e} continuity_max={max:e} out={}",
            cloud.width(),
            cloud.height(),
            cloud.len(),
            out.display()
        );
    }
    Ok(Outcome::Done)
}

/// `None` for a single-pixel cloud, which has no neighbors.
fn summary_continuity(cloud: &PseudoPointCloud) -> Result<Option<pseudo3d::Continuity>, Failure> {
    if cloud.len() < 2 {
        return Ok(None);
    }
    local_continuity(cloud).map(Some).stage("continuity")
}

fn compare(
    depth: &Path,
    format: Format,
    intrinsics: &Path,
    out_pipeline: &Path,
    out_naive: &Path,
    json: bool,
) -> Result<Outcome, Failure> {
    let map = read_depth_file(depth, format.into(), DepthKind::PredictedRelative).stage("read depth")?;
    let k = load_intrinsics(intrinsics, map.width(), map.height())?;
    let pipeline = backproject(&pipeline_relative_to_dr(&map).stage("normalize")?, &k).stage("backproject")?;
    let naive = backproject(&naive_reciprocal(&map).stage("naive reciprocal")?, &k).stage("backproject")?;
    export_ply(&pipeline, out_pipeline).stage("export")?;
    export_ply(&naive, out_naive).stage("export")?;
    let spread = distance_ratio_spread(&pipeline, &naive).stage("compare")?;
    if json {
        println!("{:#}", json!({ "width": map.width(), "height": map.height(), "ratio_spread": spread }));
    } else {
        println!("compare width={} height={} ratio_spread={spread:e}", map.width(), map.height());
    }
    Ok(Outcome::Done)
}

fn loss(pred: &[PathBuf], target: &[PathBuf], json: bool) -> Result<Outcome, Failure> {
    if pred.len() != target.len() {
        return Err(Failure {
            stage: "read actions",
            message: format!("{} prediction file(s) but {} target file(s)", pred.len(), target.len()),
        });
    }
    let mut data: Vec<Trajectory> = Vec::with_capacity(pred.len());
    for (p, t) in pred.iter().zip(target) {
        let p = read_actions_file(p).stage("read actions")?;
        let t = read_actions_file(t).stage("read actions")?;
        data.push(pair_actions(p, t).stage("pair actions")?);
    }
    let total = dataset_loss(&data).stage("loss")?;
    let mut per_step = Vec::new();
    for (i, trajectory) in data.iter().enumerate() {
        for (s, (p, t)) in trajectory.iter().enumerate() {
            per_step.push((i, s, step_loss(p, t).stage("loss")?));
        }
    }
    if json {
        let steps: Vec<_> = per_step
            .iter()
            .map(|(i, s, l)| json!({ "trajectory": i, "step": s, "loss": l }))
            .collect();
        println!("{:#}", json!({ "dataset_loss": total, "steps": steps }));
    } else {
        for (i, s, l) in &per_step {
            println!(
                "step trajectory={i} step={s} mse_xyz={:e} mse_quat={:e} bce_open={:e} total={:e}",
                l.mse_xyz, l.mse_quat, l.bce_open, l.total
            );
        }
        println!("loss trajectories={} steps={} dataset_loss={total:e}", data.len(), per_step.len());
    }
    Ok(Outcome::Done)
}
