//! Flat binary serialization of [`EncoderParams`].
//!
//! Layout: 4 magic bytes, `u32` version, `u32` output channels, then conv1
//! weight, conv1 bias, conv2 weight, conv2 bias as little-endian `f64`.

use super::{EncoderParams, INPUT_CHANNELS};
use crate::error::{Error, Result};

pub const BLOB_MAGIC: [u8; 4] = *b"P3DE";
pub const BLOB_VERSION: u32 = 1;

const FMT: &str = "encoder blob";

impl EncoderParams {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.len());
        out.extend_from_slice(&BLOB_MAGIC);
        out.extend_from_slice(&BLOB_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.out_channels() as u32).to_le_bytes());
        for t in self.tensors() {
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || bytes[..4] != BLOB_MAGIC {
            return Err(Error::format(FMT, "bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
        let version = word(4);
        if version != BLOB_VERSION {
            return Err(Error::format(FMT, format!("unsupported version {version}")));
        }
        let channels = word(8) as usize;
        if channels == 0 {
            return Err(Error::format(FMT, "zero output channels"));
        }
        let mut params = EncoderParams::zeros(channels);
        debug_assert_eq!(params.conv1.in_channels, INPUT_CHANNELS);
        let expected = 12 + 8 * params.len();
        if bytes.len() != expected {
            return Err(Error::format(
                FMT,
                format!("expected {expected} bytes, found {}", bytes.len()),
            ));
        }
        let mut values = bytes[12..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        for t in params.tensors_mut() {
            for slot in t.iter_mut() {
                *slot = values.next().unwrap();
            }
        }
        params.check().map_err(|e| Error::format(FMT, e.to_string()))?;
        Ok(params)
    }
}
