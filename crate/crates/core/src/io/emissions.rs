//! `CTCEM1` emission matrices: frame-wise log-probabilities from a CTC acoustic model.
//!
//! Layout: the magic line `CTCEM1\n`, one JSON header line, then `num_frames × vocab.len()`
//! little-endian `f32` values in row-major order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::framing::{read_framed, write_framed};
use crate::error::{Error, Result};

pub const EMISSION_MAGIC: &str = "CTCEM1\n";

/// Tolerance on `Σ exp(logprob)` for every frame.
pub const ROW_SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EmissionHeader {
    vocab: Vec<String>,
    blank_index: usize,
    separator_index: usize,
    frame_duration: f64,
    num_frames: usize,
}

/// A `T × V` grid of natural-log label probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    vocab: Vec<String>,
    blank_index: usize,
    separator_index: usize,
    frame_duration: f64,
    values: Vec<f32>,
}

impl EmissionMatrix {
    /// Builds a matrix from row-major values, checking every invariant.
    pub fn new(
        vocab: Vec<String>,
        blank_index: usize,
        separator_index: usize,
        frame_duration: f64,
        values: Vec<f32>,
    ) -> Result<Self> {
        let v = vocab.len();
        if v < 2 {
            return Err(Error::invalid("vocab", "header", "needs at least two tokens"));
        }
        if blank_index >= v {
            return Err(Error::invalid("blank_index", "header", "out of range"));
        }
        if separator_index >= v {
            return Err(Error::invalid("separator_index", "header", "out of range"));
        }
        if blank_index == separator_index {
            return Err(Error::invalid(
                "separator_index",
                "header",
                "must differ from blank_index",
            ));
        }
        if !(frame_duration.is_finite() && frame_duration > 0.0) {
            return Err(Error::invalid("frame_duration", "header", "must be positive"));
        }
        if values.is_empty() || !values.len().is_multiple_of(v) {
            return Err(Error::invalid(
                "values",
                "payload",
                format!("{} values do not form rows of {v}", values.len()),
            ));
        }
        for (frame, row) in values.chunks_exact(v).enumerate() {
            let mut sum = 0.0f64;
            for (token, &lp) in row.iter().enumerate() {
                if lp.is_nan() || lp > 0.0 {
                    return Err(Error::invalid(
                        "values",
                        format!("frame {frame}, token {token}"),
                        format!("{lp} is not a log-probability"),
                    ));
                }
                sum += f64::from(lp).exp();
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonProbabilistic { frame, sum });
            }
        }
        Ok(Self {
            vocab,
            blank_index,
            separator_index,
            frame_duration,
            values,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.values.len() / self.vocab.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn blank_index(&self) -> usize {
        self.blank_index
    }

    pub fn separator_index(&self) -> usize {
        self.separator_index
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_duration
    }

    /// Audio length covered by the frame grid, in seconds.
    pub fn duration(&self) -> f64 {
        self.num_frames() as f64 * self.frame_duration
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn row(&self, frame: usize) -> &[f32] {
        let v = self.vocab.len();
        &self.values[frame * v..(frame + 1) * v]
    }

    #[inline]
    pub fn logprob(&self, frame: usize, token: usize) -> f64 {
        f64::from(self.values[frame * self.vocab.len() + token])
    }

    #[inline]
    pub fn blank_logprob(&self, frame: usize) -> f64 {
        self.logprob(frame, self.blank_index)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = EmissionHeader {
            vocab: self.vocab.clone(),
            blank_index: self.blank_index,
            separator_index: self.separator_index,
            frame_duration: self.frame_duration,
            num_frames: self.num_frames(),
        };
        write_framed(EMISSION_MAGIC, &header, &self.values)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, values): (EmissionHeader, _) =
            read_framed(EMISSION_MAGIC, bytes, |h: &EmissionHeader| {
                h.num_frames.checked_mul(h.vocab.len())
            })?;
        if header.num_frames == 0 {
            return Err(Error::invalid("num_frames", "header", "must be at least 1"));
        }
        Self::new(
            header.vocab,
            header.blank_index,
            header.separator_index,
            header.frame_duration,
            values,
        )
    }
}

pub fn read_emissions(path: impl AsRef<Path>) -> Result<EmissionMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    EmissionMatrix::from_bytes(&bytes)
}

pub fn write_emissions(matrix: &EmissionMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix.to_bytes()).map_err(|e| Error::io(path, e))
}
