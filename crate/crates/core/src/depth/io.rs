//! Depth map readers and writers: PFM, binary PGM and headerless CSV.
//!
//! The caller always states the [`DepthKind`]; nothing is inferred from the
//! file. Samples are widened to `f64` on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::{DepthKind, DepthMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFormat {
    Pfm,
    Pgm,
    Csv,
}

impl FromStr for DepthFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pfm" => Ok(DepthFormat::Pfm),
            "pgm" => Ok(DepthFormat::Pgm),
            "csv" => Ok(DepthFormat::Csv),
            other => Err(Error::Config(format!("unknown depth format {other:?}"))),
        }
    }
}

/// Reads a depth file from disk.
pub fn read_depth_file(path: impl AsRef<Path>, format: DepthFormat, kind: DepthKind) -> Result<DepthMap> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    read_depth(&bytes, format, kind)
}

pub fn read_depth(bytes: &[u8], format: DepthFormat, kind: DepthKind) -> Result<DepthMap> {
    match format {
        DepthFormat::Pfm => read_pfm(bytes, kind),
        DepthFormat::Pgm => read_pgm(bytes, kind),
        DepthFormat::Csv => read_csv(bytes, kind),
    }
}

/// Netpbm-style header tokenizer: whitespace separated, `#` comments run to
/// end of line. Returns the tokens and the offset just past the single
/// whitespace byte that ends the header.
fn header_tokens(bytes: &[u8], count: usize, format: &'static str) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(count);
    let mut pos = 0;
    while tokens.len() < count {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(format, "truncated header"));
        }
        let token = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| Error::format(format, "header is not ASCII"))?;
        tokens.push(token.to_string());
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(format, "missing whitespace after header"));
    }
    Ok((tokens, pos + 1))
}

fn parse_dim(token: &str, format: &'static str) -> Result<usize> {
    match token.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(Error::format(format, format!("bad dimension {token:?}"))),
    }
}

/// Grayscale PFM (`Pf`). A negative scale marks little-endian samples.
/// Rows are stored bottom-to-top and flipped on load.
pub fn read_pfm(bytes: &[u8], kind: DepthKind) -> Result<DepthMap> {
    const FMT: &str = "PFM";
    let (tokens, offset) = header_tokens(bytes, 4, FMT)?;
    match tokens[0].as_str() {
        "Pf" => {}
        "PF" => return Err(Error::format(FMT, "3-channel PFM is not a depth map")),
        other => return Err(Error::format(FMT, format!("bad magic {other:?}"))),
    }
    let width = parse_dim(&tokens[1], FMT)?;
    let height = parse_dim(&tokens[2], FMT)?;
    let scale: f32 = tokens[3]
        .parse()
        .map_err(|_| Error::format(FMT, format!("bad scale {:?}", tokens[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(FMT, "scale must be finite and non-zero"));
    }
    let little = scale < 0.0;
    let data = &bytes[offset..];
    let expected = width * height * 4;
    if data.len() < expected {
        return Err(Error::format(
            FMT,
            format!("expected {expected} data bytes, found {}", data.len()),
        ));
    }
    let mut values = vec![0.0; width * height];
    for (i, chunk) in data[..expected].chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let sample = if little {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let (file_row, u) = (i / width, i % width);
        let v = height - 1 - file_row;
        values[v * width + u] = f64::from(sample);
    }
    DepthMap::new(width, height, values, kind)
}

/// Writes a little-endian grayscale PFM. Values are narrowed to `f32`.
pub fn write_pfm(mut w: impl Write, map: &DepthMap) -> std::io::Result<()> {
    write!(w, "Pf\n{} {}\n-1.0\n", map.width(), map.height())?;
    for v in (0..map.height()).rev() {
        for u in 0..map.width() {
            w.write_all(&(map.get(v, u) as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Binary PGM (`P5`). Samples are 8-bit when `maxval < 256`, otherwise
/// 16-bit big-endian, and map linearly to `raw / maxval`.
pub fn read_pgm(bytes: &[u8], kind: DepthKind) -> Result<DepthMap> {
    const FMT: &str = "PGM";
    let (tokens, offset) = header_tokens(bytes, 4, FMT)?;
    if tokens[0] != "P5" {
        return Err(Error::format(FMT, format!("bad magic {:?}", tokens[0])));
    }
    let width = parse_dim(&tokens[1], FMT)?;
    let height = parse_dim(&tokens[2], FMT)?;
    let maxval: u32 = match tokens[3].parse() {
        Ok(m) if (1..=65535).contains(&m) => m,
        _ => return Err(Error::format(FMT, format!("bad maxval {:?}", tokens[3]))),
    };
    let bytes_per_sample = if maxval < 256 { 1 } else { 2 };
    let data = &bytes[offset..];
    let expected = width * height * bytes_per_sample;
    if data.len() < expected {
        return Err(Error::format(
            FMT,
            format!("expected {expected} data bytes, found {}", data.len()),
        ));
    }
    let scale = f64::from(maxval);
    let mut values = Vec::with_capacity(width * height);
    for (i, chunk) in data[..expected].chunks_exact(bytes_per_sample).enumerate() {
        let raw = match chunk {
            [b] => u32::from(*b),
            [hi, lo] => u32::from(u16::from_be_bytes([*hi, *lo])),
            _ => unreachable!(),
        };
        if raw > maxval {
            return Err(Error::format(
                FMT,
                format!("sample {raw} at index {i} exceeds maxval {maxval}"),
            ));
        }
        values.push(f64::from(raw) / scale);
    }
    DepthMap::new(width, height, values, kind)
}

/// Writes raw samples as a binary PGM with the given `maxval`.
pub fn write_pgm(mut w: impl Write, width: usize, height: usize, samples: &[u16], maxval: u16) -> std::io::Result<()> {
    assert_eq!(samples.len(), width * height, "sample count does not match dimensions");
    assert!(maxval > 0, "maxval must be positive");
    write!(w, "P5\n{width} {height}\n{maxval}\n")?;
    for &s in samples {
        if maxval < 256 {
            w.write_all(&[s as u8])?;
        } else {
            w.write_all(&s.to_be_bytes())?;
        }
    }
    Ok(())
}

/// Headerless CSV: one line per row, `width` comma separated values per line.
pub fn read_csv(bytes: &[u8], kind: DepthKind) -> Result<DepthMap> {
    const FMT: &str = "CSV";
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut width = 0;
    let mut height = 0;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(FMT, e.to_string()))?;
        if height == 0 {
            width = record.len();
        }
        for field in record.iter() {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::format(FMT, format!("row {}: bad number {field:?}", height + 1)))?;
            values.push(value);
        }
        height += 1;
    }
    if height == 0 || width == 0 {
        return Err(Error::format(FMT, "no values"));
    }
    DepthMap::new(width, height, values, kind)
}

/// Writes a map as headerless CSV using shortest round-trip formatting.
pub fn write_csv(w: impl Write, map: &DepthMap) -> std::io::Result<()> {
    let mut w = BufWriter::new(w);
    for v in 0..map.height() {
        let row: Vec<String> = (0..map.width()).map(|u| map.get(v, u).to_string()).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}
