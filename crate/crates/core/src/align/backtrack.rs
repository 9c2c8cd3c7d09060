use super::trellis::{stay_score, switch_score};
use super::{TokenSequence, Trellis, Variant};
use crate::error::{Error, Result};
use crate::io::EmissionMatrix;

/// Token assignment for every frame of a complete alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePath {
    token_at_frame: Vec<usize>,
    enter_frame: Vec<usize>,
    exit_frame: Vec<usize>,
    score: f64,
}

impl FramePath {
    /// Builds a path from per-frame token indices, which must start at 0, end at the last token,
    /// and advance by at most one per frame.
    pub fn from_tokens(token_at_frame: Vec<usize>, num_tokens: usize, score: f64) -> Self {
        assert!(!token_at_frame.is_empty() && num_tokens > 0);
        assert_eq!(token_at_frame[0], 0, "path must start on token 0");
        assert_eq!(*token_at_frame.last().unwrap(), num_tokens - 1, "path must end on the last token");
        let mut enter_frame = vec![0; num_tokens];
        let mut exit_frame = vec![0; num_tokens];
        for (t, pair) in token_at_frame.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            assert!(step <= 1, "path skips a token at frame {}", t + 1);
            if step == 1 {
                exit_frame[pair[0]] = t + 1;
                enter_frame[pair[1]] = t + 1;
            }
        }
        exit_frame[num_tokens - 1] = token_at_frame.len();
        Self {
            token_at_frame,
            enter_frame,
            exit_frame,
            score,
        }
    }

    pub fn token_at_frame(&self) -> &[usize] {
        &self.token_at_frame
    }

    /// First frame on which each token is active.
    pub fn enter_frame(&self) -> &[usize] {
        &self.enter_frame
    }

    /// One past the last frame on which each token is active.
    pub fn exit_frame(&self) -> &[usize] {
        &self.exit_frame
    }

    /// Accumulated log-score along the path.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn num_frames(&self) -> usize {
        self.token_at_frame.len()
    }
}

/// Accumulates a path's log-score frame by frame, in the same order the trellis sums.
pub fn path_score(m: &EmissionMatrix, s: &TokenSequence, variant: Variant, token_at_frame: &[usize]) -> f64 {
    let mut score = switch_score(m, s, 0, 0);
    for t in 1..token_at_frame.len() {
        let j = token_at_frame[t];
        score += if j == token_at_frame[t - 1] {
            stay_score(m, s, variant, j, t)
        } else {
            switch_score(m, s, j, t)
        };
    }
    score
}

/// Traces the best path back from the trellis corner. Exact ties resolve to staying.
pub fn backtrack(tr: &Trellis, m: &EmissionMatrix, s: &TokenSequence) -> Result<FramePath> {
    let corner = tr.corner();
    if corner == f64::NEG_INFINITY {
        return Err(Error::NoPath);
    }
    let frames = tr.num_frames();
    let variant = tr.variant();
    let mut token_at_frame = vec![0; frames];
    let mut j = tr.num_tokens() - 1;
    for t in (1..frames).rev() {
        token_at_frame[t] = j;
        if j == 0 {
            continue;
        }
        let stay = tr.get(j, t - 1) + stay_score(m, s, variant, j, t);
        let switch = tr.get(j - 1, t - 1) + switch_score(m, s, j, t);
        if stay < switch {
            j -= 1;
        }
    }
    debug_assert_eq!(j, 0);
    token_at_frame[0] = j;
    let score = path_score(m, s, variant, &token_at_frame);
    Ok(FramePath::from_tokens(token_at_frame, tr.num_tokens(), score))
}
