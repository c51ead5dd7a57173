//! Timing and checksum harness over the fusion strategies.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fuse, FusionParams, Strategy};
use crate::encoder::FeatureMap;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BenchEntry {
    pub strategy: Strategy,
    pub reps: usize,
    /// Absent when `reps == 0`.
    pub total_ns: Option<u128>,
    pub mean_ns: Option<u128>,
    pub checksum: String,
    pub sum: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BenchReport {
    pub shape: (usize, usize, usize),
    pub heads: usize,
    pub entries: Vec<BenchEntry>,
}

impl BenchReport {
    /// One `key=value` line per strategy, preceded by a header line.
    pub fn to_text(&self) -> String {
        let (h, w, c) = self.shape;
        let mut out = format!("fuse-bench shape={h}x{w}x{c} heads={}\n", self.heads);
        for e in &self.entries {
            let _ = write!(out, "strategy={} reps={}", e.strategy, e.reps);
            if let (Some(total), Some(mean)) = (e.total_ns, e.mean_ns) {
                let _ = write!(out, " total_ns={total} mean_ns={mean}");
            }
            let _ = writeln!(out, " checksum={} sum={:e}", e.checksum, e.sum);
        }
        out
    }
}

/// FNV-1a over the little-endian bit patterns of the values.
pub fn checksum(values: &[f64]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{hash:016x}")
}

/// Uniform `[-1, 1)` features from a seed.
pub fn seeded_features(seed: u64, (h, w, c): (usize, usize, usize)) -> Result<FeatureMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FeatureMap::new(h, w, c, (0..h * w * c).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// Runs each strategy `reps` times on seeded inputs. Fusion parameters are
/// seeded from both input seeds, so the checksums depend only on the
/// arguments.
pub fn fusion_bench(
    f2d_seed: u64,
    f3d_seed: u64,
    shape: (usize, usize, usize),
    heads: usize,
    reps: usize,
    strategies: &[Strategy],
) -> Result<BenchReport> {
    let f2d = seeded_features(f2d_seed, shape)?;
    let f3d = seeded_features(f3d_seed, shape)?;
    let param_seed = f2d_seed.rotate_left(32) ^ f3d_seed;
    let mut entries = Vec::with_capacity(strategies.len());
    for &strategy in strategies {
        let params = FusionParams::init(strategy, shape.2, heads, param_seed)?;
        let out = fuse(&f2d, &f3d, &params)?;
        let (total_ns, mean_ns) = if reps == 0 {
            (None, None)
        } else {
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(fuse(&f2d, &f3d, &params)?);
            }
            let total = start.elapsed().as_nanos();
            (Some(total), Some(total / reps as u128))
        };
        entries.push(BenchEntry {
            strategy,
            reps,
            total_ns,
            mean_ns,
            checksum: checksum(out.data()),
            sum: out.data().iter().sum(),
        });
    }
    Ok(BenchReport {
        shape,
        heads,
        entries,
    })
}
