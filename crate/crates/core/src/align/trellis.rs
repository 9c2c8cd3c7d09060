use serde::{Deserialize, Serialize};

use super::TokenSequence;
use crate::error::{Error, Result};
use crate::io::EmissionMatrix;

/// Recurrence used to fill the trellis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    /// Stay transitions always pay the blank log-probability.
    Standard,
    /// On separator rows the stay term is `max(logprob(blank), c)`, with `c` a
    /// log-probability.
    Modified { c: f64 },
}

impl Variant {
    pub fn modified(c: f64) -> Result<Self> {
        if c.is_nan() || c > 0.0 {
            return Err(Error::invalid("c", "argument", format!("{c} is not a log-probability")));
        }
        Ok(Variant::Modified { c })
    }
}

/// Log-score of remaining on token `j` at frame `t`.
#[inline]
pub(crate) fn stay_score(m: &EmissionMatrix, s: &TokenSequence, variant: Variant, j: usize, t: usize) -> f64 {
    let blank = m.blank_logprob(t);
    match variant {
        Variant::Modified { c } if s.is_separator(j) => blank.max(c),
        _ => blank,
    }
}

/// Log-score of entering token `j` at frame `t`.
#[inline]
pub(crate) fn switch_score(m: &EmissionMatrix, s: &TokenSequence, j: usize, t: usize) -> f64 {
    m.logprob(t, s.tokens()[j])
}

/// `U × T` grid of best partial-alignment log-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Trellis {
    values: Vec<f64>,
    num_tokens: usize,
    num_frames: usize,
    variant: Variant,
}

impl Trellis {
    #[inline]
    pub fn get(&self, token: usize, frame: usize) -> f64 {
        self.values[token * self.num_frames + frame]
    }

    pub fn num_tokens(&self) -> usize {
        self.num_tokens
    }

    pub fn num_frames(&self) -> usize {
        self.num_frames
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Best score of a complete alignment.
    pub fn corner(&self) -> f64 {
        self.get(self.num_tokens - 1, self.num_frames - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn build_trellis_standard(m: &EmissionMatrix, s: &TokenSequence) -> Result<Trellis> {
    build_trellis(m, s, Variant::Standard)
}

pub fn build_trellis_modified(m: &EmissionMatrix, s: &TokenSequence, c: f64) -> Result<Trellis> {
    build_trellis(m, s, Variant::modified(c)?)
}

pub fn build_trellis(m: &EmissionMatrix, s: &TokenSequence, variant: Variant) -> Result<Trellis> {
    if let Variant::Modified { c } = variant {
        Variant::modified(c)?;
    }
    let frames = m.num_frames();
    let tokens = s.len();
    if frames < tokens {
        return Err(Error::PathInfeasible { frames, tokens });
    }

    let mut values = vec![f64::NEG_INFINITY; tokens * frames];
    values[0] = switch_score(m, s, 0, 0);
    for t in 1..frames {
        values[t] = values[t - 1] + stay_score(m, s, variant, 0, t);
    }
    for j in 1..tokens {
        let (done, rest) = values.split_at_mut(j * frames);
        let prev = &done[(j - 1) * frames..];
        let row = &mut rest[..frames];
        // Row j cannot be reached before frame j.
        for t in j..frames {
            let stay = row[t - 1] + stay_score(m, s, variant, j, t);
            let switch = prev[t - 1] + switch_score(m, s, j, t);
            row[t] = if stay >= switch { stay } else { switch };
        }
    }
    Ok(Trellis {
        values,
        num_tokens: tokens,
        num_frames: frames,
        variant,
    })
}
