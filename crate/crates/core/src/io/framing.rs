//! Shared framing for the binary matrix formats: magic line, JSON header line, LE `f32` payload.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn write_framed<H: Serialize>(magic: &str, header: &H, values: &[f32]) -> Vec<u8> {
    let header = serde_json::to_string(header).expect("header serialization is infallible");
    let mut out = Vec::with_capacity(magic.len() + header.len() + 1 + values.len() * 4);
    out.extend_from_slice(magic.as_bytes());
    out.extend_from_slice(header.as_bytes());
    out.push(b'\n');
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Splits a framed buffer into its header and payload. `expected_len` returns the number of
/// floats the header declares, or `None` when that count overflows.
pub(crate) fn read_framed<H, F>(magic: &'static str, bytes: &[u8], expected_len: F) -> Result<(H, Vec<f32>)>
where
    H: DeserializeOwned,
    F: FnOnce(&H) -> Option<usize>,
{
    let rest = bytes
        .strip_prefix(magic.as_bytes())
        .ok_or(Error::BadMagic { expected: magic })?;
    let newline = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::MalformedHeader("missing header terminator".into()))?;
    let line = std::str::from_utf8(&rest[..newline])
        .map_err(|e| Error::MalformedHeader(format!("header is not UTF-8: {e}")))?;
    let header: H =
        serde_json::from_str(line).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let payload = &rest[newline + 1..];
    let expected = expected_len(&header)
        .ok_or_else(|| Error::MalformedHeader("declared dimensions overflow".into()))?;
    if expected.checked_mul(4) != Some(payload.len()) {
        return Err(Error::SizeMismatch {
            expected,
            actual: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((header, values))
}
