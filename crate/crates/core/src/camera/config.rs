//! Intrinsics config files.
//!
//! A flat key-value document (TOML syntax). Either explicit:
//!
//! ```toml
//! fx = 525.0
//! fy = 525.0
//! cx = 319.5
//! cy = 239.5
//! ```
//!
//! or field-of-view based:
//!
//! ```toml
//! fov_x_deg = 60
//! fov_y_deg = 45   # optional, square pixels otherwise
//! width = 640      # optional, defaults to the depth map size
//! height = 480
//! ```
//!
//! Mixing `fx` and `fov_x_deg` is an error.

use std::path::Path;

use super::{estimate_intrinsics_from_fov, CameraIntrinsics};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum IntrinsicsConfig {
    Explicit(CameraIntrinsics),
    Fov {
        fov_x_deg: f64,
        fov_y_deg: Option<f64>,
        width: Option<usize>,
        height: Option<usize>,
    },
}

const EXPLICIT_KEYS: [&str; 4] = ["fx", "fy", "cx", "cy"];
const FOV_KEYS: [&str; 4] = ["fov_x_deg", "fov_y_deg", "width", "height"];

impl IntrinsicsConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    /// Intrinsics for an image of the given size. In FOV mode a size given in
    /// the file must agree with it.
    pub fn resolve(&self, width: usize, height: usize) -> Result<CameraIntrinsics> {
        match *self {
            IntrinsicsConfig::Explicit(k) => Ok(k),
            IntrinsicsConfig::Fov {
                fov_x_deg,
                fov_y_deg,
                width: w,
                height: h,
            } => {
                if w.is_some_and(|w| w != width) || h.is_some_and(|h| h != height) {
                    return Err(Error::Config(format!(
                        "config size {}x{} does not match image size {width}x{height}",
                        w.map_or("?".into(), |w| w.to_string()),
                        h.map_or("?".into(), |h| h.to_string()),
                    )));
                }
                estimate_intrinsics_from_fov(fov_x_deg, width, height, fov_y_deg)
            }
        }
    }
}

fn number(table: &toml::Table, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(f)) => Ok(Some(*f)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(Error::Config(format!("{key} must be a number, got {other}"))),
    }
}

fn size(table: &toml::Table, key: &str) -> Result<Option<usize>> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i > 0 => Ok(Some(*i as usize)),
        Some(other) => Err(Error::Config(format!("{key} must be a positive integer, got {other}"))),
    }
}

impl std::str::FromStr for IntrinsicsConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        if let Some(key) = table
            .keys()
            .find(|k| !EXPLICIT_KEYS.contains(&k.as_str()) && !FOV_KEYS.contains(&k.as_str()))
        {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        let explicit = table.contains_key("fx");
        let fov = table.contains_key("fov_x_deg");
        match (explicit, fov) {
            (true, true) => Err(Error::Config("both fx and fov_x_deg given; pick one mode".into())),
            (false, false) => Err(Error::Config("need either fx, fy, cx, cy or fov_x_deg".into())),
            (true, false) => {
                if let Some(key) = FOV_KEYS.iter().find(|k| table.contains_key(**k)) {
                    return Err(Error::Config(format!("{key} is not valid with explicit fx")));
                }
                let mut vals = [0.0; 4];
                for (slot, key) in vals.iter_mut().zip(EXPLICIT_KEYS) {
                    *slot = number(&table, key)?.ok_or_else(|| Error::Config(format!("missing {key}")))?;
                }
                let [fx, fy, cx, cy] = vals;
                Ok(IntrinsicsConfig::Explicit(CameraIntrinsics::new(fx, fy, cx, cy)?))
            }
            (false, true) => {
                if let Some(key) = EXPLICIT_KEYS.iter().find(|k| table.contains_key(**k)) {
                    return Err(Error::Config(format!("{key} is not valid with fov_x_deg")));
                }
                Ok(IntrinsicsConfig::Fov {
                    fov_x_deg: number(&table, "fov_x_deg")?.unwrap(),
                    fov_y_deg: number(&table, "fov_y_deg")?,
                    width: size(&table, "width")?,
                    height: size(&table, "height")?,
                })
            }
        }
    }
}
