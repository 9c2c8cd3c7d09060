//! Word timings from decoder cross-attention via dynamic time warping.

use super::WordTiming;
use crate::io::AttentionMatrix;

/// A monotone warping path through the (token, frame) grid and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpPath {
    pub cells: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Minimum-cost path under cost `-weight` with steps (+1,+1), (0,+1) and (+1,0) from the
/// first cell to the last. Backtrace ties prefer the diagonal, then advancing the frame.
pub fn dtw_path(a: &AttentionMatrix) -> WarpPath {
    let n = a.num_tokens();
    let m = a.num_frames();
    let idx = |i: usize, j: usize| i * m + j;
    let mut acc = vec![f64::INFINITY; n * m];
    for i in 0..n {
        for j in 0..m {
            let cost = -a.weight(i, j);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[idx(i - 1, j - 1)] } else { f64::INFINITY };
                let left = if j > 0 { acc[idx(i, j - 1)] } else { f64::INFINITY };
                let up = if i > 0 { acc[idx(i - 1, j)] } else { f64::INFINITY };
                diag.min(left).min(up)
            };
            acc[idx(i, j)] = best + cost;
        }
    }

    let mut cells = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 { acc[idx(i - 1, j - 1)] } else { f64::INFINITY };
        let left = if j > 0 { acc[idx(i, j - 1)] } else { f64::INFINITY };
        let up = if i > 0 { acc[idx(i - 1, j)] } else { f64::INFINITY };
        if diag <= left && diag <= up {
            i -= 1;
            j -= 1;
        } else if left <= up {
            j -= 1;
        } else {
            i -= 1;
        }
        cells.push((i, j));
    }
    cells.reverse();
    WarpPath {
        cells,
        cost: acc[idx(n - 1, m - 1)],
    }
}

/// Frame at which each token starts, followed by `num_frames`.
fn token_boundaries(a: &AttentionMatrix) -> Vec<usize> {
    let n = a.num_tokens();
    let m = a.num_frames();
    let mut bounds = Vec::with_capacity(n + 1);
    if a.weights().iter().all(|&w| w == 0.0) {
        log::warn!("attention matrix is all zeros; splitting frames uniformly");
        bounds.extend((0..n).map(|i| i * m / n));
    } else {
        let path = dtw_path(a);
        let mut next = 0;
        for &(i, j) in &path.cells {
            if i == next {
                bounds.push(j);
                next += 1;
            }
        }
    }
    bounds.push(m);
    bounds
}

/// Aligns words using raw cross-attention weights. Words whose tokens receive no frames are
/// omitted, so `word_index` may skip values.
pub fn align_dtw_attention(a: &AttentionMatrix) -> Vec<WordTiming> {
    let bounds = token_boundaries(a);
    let t2w = a.token_to_word();
    let fd = a.frame_duration();
    let mut out = Vec::new();
    let mut first = 0;
    while first < t2w.len() {
        let word = t2w[first];
        let mut last = first;
        while last + 1 < t2w.len() && t2w[last + 1] == word {
            last += 1;
        }
        let (start, end) = (bounds[first], bounds[last + 1]);
        if start < end {
            let text = a.words().get(word).cloned().unwrap_or_default();
            out.push(WordTiming::new(word, text, start as f64 * fd, end as f64 * fd));
        }
        first = last + 1;
    }
    out
}
