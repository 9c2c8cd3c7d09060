//! Alignment gaps: extraction, reference labelling and word coverage.
//!
//! Interval arithmetic is done on times quantized to whole microseconds so that threshold
//! comparisons are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::align::WordTiming;
use crate::io::RefWord;
use crate::text_align::{EditOp, WordAlignmentPair};

pub const DEFAULT_MIN_GAP: f64 = 0.3;
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapLabel {
    Speech,
    Empty,
}

impl fmt::Display for GapLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GapLabel::Speech => "speech",
            GapLabel::Empty => "empty",
        })
    }
}

impl std::str::FromStr for GapLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "speech" | "1" => Ok(GapLabel::Speech),
            "empty" | "0" => Ok(GapLabel::Empty),
            other => Err(format!("{other:?} is not a gap label")),
        }
    }
}

/// An unaligned stretch of audio. `label` is the reference label, `predicted` and `score`
/// come from a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub start: f64,
    pub end: f64,
    #[serde(default)]
    pub label: Option<GapLabel>,
    #[serde(default)]
    pub predicted: Option<GapLabel>,
    #[serde(default)]
    pub score: Option<f64>,
}

impl Gap {
    pub fn new(start: f64, end: f64) -> Self {
        Self {
            start,
            end,
            label: None,
            predicted: None,
            score: None,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[inline]
pub(crate) fn micros(t: f64) -> i64 {
    (t * 1e6).round() as i64
}

/// Overlap of `[a0, a1)` and `[b0, b1)` in microseconds.
fn overlap_us(a0: i64, a1: i64, b0: i64, b1: i64) -> i64 {
    (a1.min(b1) - a0.max(b0)).max(0)
}

/// `overlap / word_len > threshold`, evaluated without rounding error.
fn exceeds(overlap: i64, word_len: i64, threshold: f64) -> bool {
    word_len > 0 && overlap as f64 > threshold * word_len as f64
}

/// Candidate gaps are the stretch before the first word, every space between consecutive
/// words, and the stretch after the last word up to `audio_duration`. Only those at least
/// `min_gap` long are kept.
pub fn extract_gaps(timings: &[WordTiming], audio_duration: f64, min_gap: f64) -> Vec<Gap> {
    let min_us = micros(min_gap);
    let mut edges = Vec::with_capacity(timings.len() + 1);
    let mut cursor = 0.0;
    for w in timings {
        edges.push((cursor, w.start));
        cursor = w.end;
    }
    edges.push((cursor, audio_duration));
    edges
        .into_iter()
        .filter(|&(s, e)| {
            let len = micros(e) - micros(s);
            len > 0 && len >= min_us
        })
        .map(|(s, e)| Gap::new(s, e))
        .collect()
}

/// A gap holds speech when some reference word has more than `threshold` of its duration
/// inside it.
pub fn label_gap(g: &Gap, ref_words: &[RefWord], threshold: f64) -> GapLabel {
    let (g0, g1) = (micros(g.start), micros(g.end));
    let speech = ref_words.iter().any(|w| {
        let (w0, w1) = (micros(w.start), micros(w.end));
        exceeds(overlap_us(w0, w1, g0, g1), w1 - w0, threshold)
    });
    if speech {
        GapLabel::Speech
    } else {
        GapLabel::Empty
    }
}

/// Sorted, merged microsecond intervals.
fn union_us<'a>(gaps: impl IntoIterator<Item = &'a Gap>) -> Vec<(i64, i64)> {
    let mut iv: Vec<(i64, i64)> = gaps
        .into_iter()
        .map(|g| (micros(g.start), micros(g.end)))
        .filter(|(s, e)| e > s)
        .collect();
    iv.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(iv.len());
    for (s, e) in iv {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

fn covered_fraction(w: &RefWord, union: &[(i64, i64)]) -> (i64, i64) {
    let (w0, w1) = (micros(w.start), micros(w.end));
    let inside = union.iter().map(|&(s, e)| overlap_us(w0, w1, s, e)).sum();
    (inside, w1 - w0)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCoverage {
    pub covered: usize,
    pub uncovered: usize,
}

impl ClassCoverage {
    pub fn total(&self) -> usize {
        self.covered + self.uncovered
    }

    pub fn merge(&mut self, o: &Self) {
        self.covered += o.covered;
        self.uncovered += o.uncovered;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCoverage {
    pub ref_index: usize,
    pub transcribed: bool,
    pub fraction: f64,
    pub covered: bool,
}

/// How many reference words lie mostly inside gaps, split by whether the hypothesis
/// transcribed them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub untranscribed: ClassCoverage,
    pub transcribed: ClassCoverage,
    pub words: Vec<WordCoverage>,
}

impl CoverageReport {
    /// Adds another report's counters; per-word entries are not carried over.
    pub fn merge_counts(&mut self, o: &Self) {
        self.untranscribed.merge(&o.untranscribed);
        self.transcribed.merge(&o.transcribed);
    }
}

/// Covers with the union of `gaps` using the same majority rule as [`label_gap`].
pub fn coverage_counts(gaps: &[Gap], ref_words: &[RefWord], pairs: &[WordAlignmentPair]) -> CoverageReport {
    coverage_with_threshold(gaps, ref_words, pairs, DEFAULT_OVERLAP_THRESHOLD)
}

pub fn coverage_with_threshold(
    gaps: &[Gap],
    ref_words: &[RefWord],
    pairs: &[WordAlignmentPair],
    threshold: f64,
) -> CoverageReport {
    let union = union_us(gaps);
    let mut report = CoverageReport::default();
    for p in pairs {
        let Some(r) = p.ref_index else { continue };
        let Some(w) = ref_words.get(r) else { continue };
        let (inside, len) = covered_fraction(w, &union);
        let covered = exceeds(inside, len, threshold);
        let transcribed = p.op != EditOp::Delete;
        let class = if transcribed {
            &mut report.transcribed
        } else {
            &mut report.untranscribed
        };
        if covered {
            class.covered += 1;
        } else {
            class.uncovered += 1;
        }
        report.words.push(WordCoverage {
            ref_index: r,
            transcribed,
            fraction: if len > 0 { inside as f64 / len as f64 } else { 0.0 },
            covered,
        });
    }
    report
}

/// One word class of the pipeline detection table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionCounts {
    pub classified_and_covered: usize,
    pub classified_but_uncovered: usize,
    pub not_classified: usize,
}

impl DetectionCounts {
    pub fn total(&self) -> usize {
        self.classified_and_covered + self.classified_but_uncovered + self.not_classified
    }

    pub fn merge(&mut self, o: &Self) {
        self.classified_and_covered += o.classified_and_covered;
        self.classified_but_uncovered += o.classified_but_uncovered;
        self.not_classified += o.not_classified;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionTable {
    pub transcribed: DetectionCounts,
    pub untranscribed: DetectionCounts,
}

impl DetectionTable {
    pub fn merge(&mut self, o: &Self) {
        self.transcribed.merge(&o.transcribed);
        self.untranscribed.merge(&o.untranscribed);
    }
}

/// Pipeline outcome per reference word of one utterance. When the utterance produced no gap
/// nothing went through the classifier and every word is `not_classified`. Otherwise a word
/// is `classified_and_covered` when the gaps predicted as speech cover more than
/// `threshold` of it.
pub fn detection_counts(
    gaps: &[Gap],
    ref_words: &[RefWord],
    pairs: &[WordAlignmentPair],
    threshold: f64,
) -> DetectionTable {
    let mut table = DetectionTable::default();
    let speech: Vec<Gap> = gaps
        .iter()
        .filter(|g| g.predicted == Some(GapLabel::Speech))
        .cloned()
        .collect();
    let coverage = coverage_with_threshold(&speech, ref_words, pairs, threshold);
    for w in &coverage.words {
        let row = if w.transcribed {
            &mut table.transcribed
        } else {
            &mut table.untranscribed
        };
        if gaps.is_empty() {
            row.not_classified += 1;
        } else if w.covered {
            row.classified_and_covered += 1;
        } else {
            row.classified_but_uncovered += 1;
        }
    }
    table
}

/// Marks every word as not classified, for utterances the pipeline could not align.
pub fn unclassified(pairs: &[WordAlignmentPair]) -> DetectionTable {
    let mut table = DetectionTable::default();
    for p in pairs.iter().filter(|p| p.ref_index.is_some()) {
        if p.op == EditOp::Delete {
            table.untranscribed.not_classified += 1;
        } else {
            table.transcribed.not_classified += 1;
        }
    }
    table
}
