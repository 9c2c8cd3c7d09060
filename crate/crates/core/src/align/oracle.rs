//! Exhaustive search over every stay/switch sequence. Exponential; only for checking the
//! trellis on small instances.

use super::{FramePath, TokenSequence, Variant};
use crate::error::{Error, Result};
use crate::io::EmissionMatrix;

pub const ORACLE_MAX_FRAMES: usize = 12;
pub const ORACLE_MAX_TOKENS: usize = 6;

/// Enumerates every monotone path and returns the first one (in lexicographic order of switch
/// frames) reaching the maximum score.
pub fn brute_force_best_path(
    m: &EmissionMatrix,
    s: &TokenSequence,
    variant: Variant,
) -> Result<(FramePath, f64)> {
    let frames = m.num_frames();
    let tokens = s.len();
    if frames > ORACLE_MAX_FRAMES || tokens > ORACLE_MAX_TOKENS {
        return Err(Error::InstanceTooLarge { frames, tokens });
    }
    if frames < tokens {
        return Err(Error::PathInfeasible { frames, tokens });
    }

    let mut switches = Vec::with_capacity(tokens - 1);
    let mut best: Option<(Vec<usize>, f64)> = None;
    enumerate(1, frames, tokens - 1, &mut switches, &mut |sw| {
        let path = expand(sw, frames);
        let score = score_path(m, s, variant, &path);
        if best.as_ref().is_none_or(|(_, b)| score > *b) {
            best = Some((path, score));
        }
    });
    let (path, score) = best.expect("at least one path exists when frames >= tokens");
    Ok((FramePath::from_tokens(path, tokens, score), score))
}

fn enumerate(from: usize, frames: usize, left: usize, acc: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if left == 0 {
        visit(acc);
        return;
    }
    for t in from..=frames - left {
        acc.push(t);
        enumerate(t + 1, frames, left - 1, acc, visit);
        acc.pop();
    }
}

fn expand(switch_frames: &[usize], frames: usize) -> Vec<usize> {
    let mut token = 0;
    (0..frames)
        .map(|t| {
            if switch_frames.get(token) == Some(&t) {
                token += 1;
            }
            token
        })
        .collect()
}

fn score_path(m: &EmissionMatrix, s: &TokenSequence, variant: Variant, path: &[usize]) -> f64 {
    let emit = |t: usize, j: usize| f64::from(m.row(t)[s.tokens()[j]]);
    let mut total = emit(0, 0);
    for t in 1..path.len() {
        let j = path[t];
        total += if j != path[t - 1] {
            emit(t, j)
        } else {
            let blank = f64::from(m.row(t)[m.blank_index()]);
            match variant {
                Variant::Modified { c } if s.tokens()[j] == m.separator_index() => blank.max(c),
                _ => blank,
            }
        };
    }
    total
}
