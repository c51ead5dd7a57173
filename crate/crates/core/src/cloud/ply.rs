//! Binary little-endian PLY for pseudo point clouds.
//!
//! Vertex properties are `x y z` as `float`, followed by `red green blue` as
//! `uchar` when the cloud has colors. The grid size travels in a
//! `comment grid <width> <height>` header line; files without it load as a
//! single row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::PseudoPointCloud;
use crate::error::{Error, Result};

const FMT: &str = "PLY";

pub fn write_ply(w: impl Write, cloud: &PseudoPointCloud) -> std::io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "ply")?;
    writeln!(w, "format binary_little_endian 1.0")?;
    writeln!(w, "comment grid {} {}", cloud.width(), cloud.height())?;
    writeln!(w, "element vertex {}", cloud.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    if cloud.colors().is_some() {
        for ch in ["red", "green", "blue"] {
            writeln!(w, "property uchar {ch}")?;
        }
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.points().iter().enumerate() {
        for c in p {
            w.write_all(&(*c as f32).to_le_bytes())?;
        }
        if let Some(colors) = cloud.colors() {
            w.write_all(&colors[i])?;
        }
    }
    w.flush()
}

pub fn export_ply(cloud: &PseudoPointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ply(file, cloud).map_err(|e| Error::io(path, e))
}

pub fn import_ply(path: impl AsRef<Path>) -> Result<PseudoPointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    read_ply(&bytes)
}

/// Reads the files produced by [`write_ply`]. Coordinates come back as the
/// stored `f32` values widened to `f64`.
pub fn read_ply(bytes: &[u8]) -> Result<PseudoPointCloud> {
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format(FMT, "header is not terminated by end_header"))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(|s| s.trim_end_matches('\r'))
            .map_err(|_| Error::format(FMT, "header is not ASCII"))
    };

    if next_line()? != "ply" {
        return Err(Error::format(FMT, "missing ply magic"));
    }
    let mut vertices = None;
    let mut grid = None;
    let mut props = Vec::new();
    loop {
        let line = next_line()?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["end_header"] => break,
            ["format", "binary_little_endian", "1.0"] => {}
            ["format", other, ..] => {
                return Err(Error::format(FMT, format!("unsupported format {other}")));
            }
            ["comment", "grid", w, h] => {
                let w: usize = w.parse().map_err(|_| Error::format(FMT, "bad grid width"))?;
                let h: usize = h.parse().map_err(|_| Error::format(FMT, "bad grid height"))?;
                grid = Some((w, h));
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", "vertex", n] => {
                vertices = Some(n.parse::<usize>().map_err(|_| Error::format(FMT, "bad vertex count"))?);
            }
            ["element", name, ..] => {
                return Err(Error::format(FMT, format!("unexpected element {name}")));
            }
            ["property", ty, name] => props.push((ty.to_string(), name.to_string())),
            _ => return Err(Error::format(FMT, format!("unrecognized header line {line:?}"))),
        }
    }
    let n = vertices.ok_or_else(|| Error::format(FMT, "no vertex element"))?;
    let xyz = [("float", "x"), ("float", "y"), ("float", "z")];
    let rgb = [("uchar", "red"), ("uchar", "green"), ("uchar", "blue")];
    let matches = |expected: &[(&str, &str)]| {
        props.len() == expected.len()
            && props
                .iter()
                .zip(expected)
                .all(|((t, n), (et, en))| t == et && n == en)
    };
    let has_colors = if matches(&xyz) {
        false
    } else if matches(&[xyz, rgb].concat()) {
        true
    } else {
        return Err(Error::format(FMT, "expected properties x y z [red green blue]"));
    };
    let stride = if has_colors { 15 } else { 12 };
    let data = &bytes[pos..];
    if data.len() < n * stride {
        return Err(Error::format(
            FMT,
            format!("expected {} vertex bytes, found {}", n * stride, data.len()),
        ));
    }
    let mut points = Vec::with_capacity(n);
    let mut colors = has_colors.then(|| Vec::with_capacity(n));
    for rec in data[..n * stride].chunks_exact(stride) {
        let f = |i: usize| f64::from(f32::from_le_bytes([rec[i], rec[i + 1], rec[i + 2], rec[i + 3]]));
        points.push([f(0), f(4), f(8)]);
        if let Some(c) = colors.as_mut() {
            c.push([rec[12], rec[13], rec[14]]);
        }
    }
    let (w, h) = grid.unwrap_or((n, 1));
    if w * h != n {
        return Err(Error::format(FMT, format!("grid {w}x{h} does not hold {n} vertices")));
    }
    PseudoPointCloud::new(w, h, points, colors)
}
