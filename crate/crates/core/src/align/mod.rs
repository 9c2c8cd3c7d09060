//! Forced alignment of a hypothesis transcript against frame-wise CTC emissions, plus the
//! cross-attention DTW aligner.

mod backtrack;
mod dtw;
pub mod oracle;
mod timings;
mod tokenize;
mod trellis;


pub use backtrack::{backtrack, path_score, FramePath};
pub use dtw::{align_dtw_attention, dtw_path, WarpPath};
pub use oracle::brute_force_best_path;
pub use timings::{path_to_word_timings, WordTiming};
pub use tokenize::{tokenize, TokenSequence, WordSpan};
pub use trellis::{build_trellis, build_trellis_modified, build_trellis_standard, Trellis, Variant};

use crate::error::Result;
use crate::io::{EmissionMatrix, HypTranscript};

/// Runs tokenization, trellis construction and backtracking, returning word timings.
pub fn align_ctc(m: &EmissionMatrix, hyp: &HypTranscript, variant: Variant) -> Result<Vec<WordTiming>> {
    let s = tokenize(hyp, m)?;
    let tr = build_trellis(m, &s, variant)?;
    let path = backtrack(&tr, m, &s)?;
    Ok(path_to_word_timings(&path, &s, m.frame_duration()))
}
