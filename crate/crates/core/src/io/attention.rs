//! `ATTN1` cross-attention matrices (tokens × frames), framed like emission files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::framing::{read_framed, write_framed};
use crate::error::{Error, Result};

pub const ATTENTION_MAGIC: &str = "ATTN1\n";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AttentionHeader {
    num_tokens: usize,
    num_frames: usize,
    frame_duration: f64,
    token_to_word: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    words: Vec<String>,
}

/// Decoder-token by audio-frame attention weights with a token→word grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    num_tokens: usize,
    num_frames: usize,
    frame_duration: f64,
    token_to_word: Vec<usize>,
    words: Vec<String>,
    weights: Vec<f32>,
}

impl AttentionMatrix {
    /// `words` may be empty; otherwise it names every word referenced by `token_to_word`.
    pub fn new(
        num_tokens: usize,
        num_frames: usize,
        frame_duration: f64,
        token_to_word: Vec<usize>,
        words: Vec<String>,
        weights: Vec<f32>,
    ) -> Result<Self> {
        if num_tokens == 0 {
            return Err(Error::invalid("num_tokens", "header", "must be at least 1"));
        }
        if num_frames == 0 {
            return Err(Error::invalid("num_frames", "header", "must be at least 1"));
        }
        if !(frame_duration.is_finite() && frame_duration > 0.0) {
            return Err(Error::invalid("frame_duration", "header", "must be positive"));
        }
        if token_to_word.len() != num_tokens {
            return Err(Error::invalid(
                "token_to_word",
                "header",
                format!("has {} entries for {num_tokens} tokens", token_to_word.len()),
            ));
        }
        if token_to_word.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid(
                "token_to_word",
                "header",
                "word indices must be non-decreasing",
            ));
        }
        if !words.is_empty() && token_to_word.iter().any(|&w| w >= words.len()) {
            return Err(Error::invalid(
                "token_to_word",
                "header",
                "references a word beyond the word list",
            ));
        }
        if weights.len() != num_tokens * num_frames {
            return Err(Error::SizeMismatch {
                expected: num_tokens * num_frames,
                actual: weights.len() * 4,
            });
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid(
                "weights",
                format!("token {}, frame {}", i / num_frames, i % num_frames),
                "weights must be finite and non-negative",
            ));
        }
        Ok(Self {
            num_tokens,
            num_frames,
            frame_duration,
            token_to_word,
            words,
            weights,
        })
    }

    pub fn num_tokens(&self) -> usize {
        self.num_tokens
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_duration
    }

    pub fn token_to_word(&self) -> &[usize] {
        &self.token_to_word
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, token: usize, frame: usize) -> f64 {
        f64::from(self.weights[token * self.num_frames + frame])
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let header = AttentionHeader {
            num_tokens: self.num_tokens,
            num_frames: self.num_frames,
            frame_duration: self.frame_duration,
            token_to_word: self.token_to_word.clone(),
            words: self.words.clone(),
        };
        write_framed(ATTENTION_MAGIC, &header, &self.weights)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (h, weights): (AttentionHeader, _) =
            read_framed(ATTENTION_MAGIC, bytes, |h: &AttentionHeader| {
                h.num_tokens.checked_mul(h.num_frames)
            })?;
        Self::new(
            h.num_tokens,
            h.num_frames,
            h.frame_duration,
            h.token_to_word,
            h.words,
            weights,
        )
    }
}

pub fn read_attention(path: impl AsRef<Path>) -> Result<AttentionMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    AttentionMatrix::from_bytes(&bytes)
}

pub fn write_attention(matrix: &AttentionMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, matrix.to_bytes()).map_err(|e| Error::io(path, e))
}
