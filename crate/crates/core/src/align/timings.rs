use serde::{Deserialize, Serialize};

use super::{FramePath, TokenSequence};

/// One aligned word, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordTiming {
    pub word_index: usize,
    pub text: String,
    pub start: f64,
    pub end: f64,
}

impl WordTiming {
    pub fn new(word_index: usize, text: impl Into<String>, start: f64, end: f64) -> Self {
        Self {
            word_index,
            text: text.into(),
            start,
            end,
        }
    }

    /// Midpoint of the word.
    pub fn position(&self) -> f64 {
        (self.start + self.end) / 2.0
    }

    /// Half of the word's duration.
    pub fn half_length(&self) -> f64 {
        (self.end - self.start) / 2.0
    }
}

/// Converts a token path into word timings. A word runs from the frame its first character is
/// entered to the frame its last character is left; separator frames belong to no word.
pub fn path_to_word_timings(p: &FramePath, s: &TokenSequence, frame_duration: f64) -> Vec<WordTiming> {
    s.word_spans()
        .iter()
        .map(|span| {
            WordTiming::new(
                span.word_index,
                s.words()[span.word_index].clone(),
                p.enter_frame()[span.first] as f64 * frame_duration,
                p.exit_frame()[span.last] as f64 * frame_duration,
            )
        })
        .collect()
}
