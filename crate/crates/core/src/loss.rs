//! Behavior-cloning loss.
//!
//! Per step: mean squared error over the 3 position components, mean squared
//! error over the 4 quaternion components, and binary cross-entropy on the
//! gripper open probability. The dataset loss averages step totals over all
//! steps.

use std::path::Path;

use crate::error::{Error, Result};

/// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]` before the log.
pub const BCE_EPS: f64 = 1e-7;

/// Unit-norm tolerance for target quaternions.
pub const QUAT_NORM_TOL: f64 = 1e-6;

/// Quaternions are stored `[w, x, y, z]`. `open` is a probability for
/// predictions and a 0/1 label for targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub xyz: [f64; 3],
    pub quat: [f64; 4],
    pub open: f64,
}

impl Action {
    pub fn new(xyz: [f64; 3], quat: [f64; 4], open: f64) -> Self {
        Action { xyz, quat, open }
    }

    fn is_finite(&self) -> bool {
        self.xyz.iter().chain(&self.quat).all(|v| v.is_finite()) && self.open.is_finite()
    }

    /// `[x, y, z, qw, qx, qy, qz, open]`.
    pub fn to_row(&self) -> [f64; 8] {
        let [x, y, z] = self.xyz;
        let [qw, qx, qy, qz] = self.quat;
        [x, y, z, qw, qx, qy, qz, self.open]
    }

    pub fn from_row(r: [f64; 8]) -> Self {
        Action::new([r[0], r[1], r[2]], [r[3], r[4], r[5], r[6]], r[7])
    }

    pub fn validate_prediction(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite("predicted action"));
        }
        if !(0.0..=1.0).contains(&self.open) {
            return Err(Error::InvalidAction(format!("open probability {} outside [0, 1]", self.open)));
        }
        Ok(())
    }

    pub fn validate_target(&self) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::NonFinite("target action"));
        }
        let norm = self.quat.iter().map(|q| q * q).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > QUAT_NORM_TOL {
            return Err(Error::InvalidAction(format!("target quaternion norm {norm} is not 1")));
        }
        if self.open != 0.0 && self.open != 1.0 {
            return Err(Error::InvalidAction(format!("target open label {} is not 0 or 1", self.open)));
        }
        Ok(())
    }
}

/// Ordered `(prediction, target)` pairs.
pub type Trajectory = Vec<(Action, Action)>;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StepLoss {
    pub mse_xyz: f64,
    pub mse_quat: f64,
    pub bce_open: f64,
    pub total: f64,
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / a.len() as f64
}

/// `-[y ln p + (1 - y) ln(1 - p)]` with `p` clamped.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

pub fn step_loss(pred: &Action, target: &Action) -> Result<StepLoss> {
    pred.validate_prediction()?;
    target.validate_target()?;
    let mse_xyz = mse(&pred.xyz, &target.xyz);
    let mse_quat = mse(&pred.quat, &target.quat);
    let bce_open = bce(pred.open, target.open);
    Ok(StepLoss {
        mse_xyz,
        mse_quat,
        bce_open,
        total: mse_xyz + mse_quat + bce_open,
    })
}

/// Sum of step totals over all trajectories divided by the number of steps
/// (`N * T` when every trajectory has length `T`).
pub fn dataset_loss(trajectories: &[Trajectory]) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut total = 0.0;
    let mut steps = 0usize;
    for (i, trajectory) in trajectories.iter().enumerate() {
        if trajectory.is_empty() {
            return Err(Error::EmptyTrajectory(i));
        }
        for (pred, target) in trajectory {
            total += step_loss(pred, target)?.total;
            steps += 1;
        }
    }
    Ok(total / steps as f64)
}

const ACTION_COLUMNS: [&str; 8] = ["x", "y", "z", "qw", "qx", "qy", "qz", "open"];

/// Reads rows of `x,y,z,qw,qx,qy,qz,open`. A first row equal to those
/// column names is skipped.
pub fn read_actions_csv(bytes: &[u8]) -> Result<Vec<Action>> {
    const FMT: &str = "action CSV";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut actions = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(FMT, e.to_string()))?;
        if line == 0 && record.iter().eq(ACTION_COLUMNS) {
            continue;
        }
        if record.len() != 8 {
            return Err(Error::format(FMT, format!("row {}: expected 8 columns, found {}", line + 1, record.len())));
        }
        let mut row = [0.0; 8];
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = field
                .parse()
                .map_err(|_| Error::format(FMT, format!("row {}: bad number {field:?}", line + 1)))?;
        }
        actions.push(Action::from_row(row));
    }
    Ok(actions)
}

pub fn read_actions_file(path: impl AsRef<Path>) -> Result<Vec<Action>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_actions_csv(&bytes)
}

/// Zips row-aligned prediction and target lists into one trajectory.
pub fn pair_actions(predictions: Vec<Action>, targets: Vec<Action>) -> Result<Trajectory> {
    if predictions.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    Ok(predictions.into_iter().zip(targets).collect())
}
