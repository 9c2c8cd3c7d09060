//! Alignment quality of automatic word timings against reference timings.
//!
//! Each word is described by its midpoint `p = (s + e) / 2` and half-length
//! `l = (e - s) / 2`. With the reference word first:
//!
//! * position: `1 / (|(p1 - p2) / l1| + 1)`
//! * length:   `1 / (|(l1 - l2) / l1| + 1)`
//! * combined: position × length
//!
//! All three lie in `(0, 1]` and equal 1 only for identical spans. The scores are not
//! symmetric in their arguments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::align::WordTiming;
use crate::error::{Error, Result};
use crate::text_align::{neighbors_of_untranscribed, EditOp, WordAlignmentPair};

fn reference_half_length(reference: &WordTiming) -> Result<f64> {
    let l1 = reference.half_length();
    if l1 > 0.0 {
        Ok(l1)
    } else {
        Err(Error::ZeroLengthReference)
    }
}

pub fn position_score(reference: &WordTiming, aligned: &WordTiming) -> Result<f64> {
    let l1 = reference_half_length(reference)?;
    Ok(1.0 / (((reference.position() - aligned.position()) / l1).abs() + 1.0))
}

pub fn length_score(reference: &WordTiming, aligned: &WordTiming) -> Result<f64> {
    let l1 = reference_half_length(reference)?;
    Ok(1.0 / (((l1 - aligned.half_length()) / l1).abs() + 1.0))
}

pub fn combined_score(reference: &WordTiming, aligned: &WordTiming) -> Result<f64> {
    Ok(position_score(reference, aligned)? * length_score(reference, aligned)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub reference: WordTiming,
    pub aligned: WordTiming,
    pub position: f64,
    pub length: f64,
    pub combined: f64,
}

impl ScoredPair {
    pub fn new(reference: WordTiming, aligned: WordTiming) -> Result<Self> {
        let position = position_score(&reference, &aligned)?;
        let length = length_score(&reference, &aligned)?;
        Ok(Self {
            reference,
            aligned,
            position,
            length,
            combined: position * length,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllWords,
    AroundUntranscribed,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::AllWords => "all_words",
            Scope::AroundUntranscribed => "around_untranscribed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub scope: Scope,
    pub position: f64,
    pub length: f64,
    pub combined: f64,
    pub pairs: usize,
}

/// Running sums for corpus-level means; merging is order-independent up to float rounding.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreAccumulator {
    pub position: f64,
    pub length: f64,
    pub combined: f64,
    pub pairs: usize,
}

impl ScoreAccumulator {
    pub fn add(&mut self, p: &ScoredPair) {
        self.position += p.position;
        self.length += p.length;
        self.combined += p.combined;
        self.pairs += 1;
    }

    pub fn merge(&mut self, o: &Self) {
        self.position += o.position;
        self.length += o.length;
        self.combined += o.combined;
        self.pairs += o.pairs;
    }

    pub fn finish(&self, scope: Scope) -> Result<ScoreSummary> {
        if self.pairs == 0 {
            return Err(Error::NoPairs);
        }
        let n = self.pairs as f64;
        Ok(ScoreSummary {
            scope,
            position: self.position / n,
            length: self.length / n,
            combined: self.combined / n,
            pairs: self.pairs,
        })
    }
}

/// Scores every aligned reference/hypothesis pair in `scope` for which both timings exist.
/// `reference` is indexed by reference position; `aligned` holds hypothesis timings looked
/// up by `word_index`. With `matches_only`, substitutions are skipped.
pub fn score_pairs(
    pairs: &[WordAlignmentPair],
    reference: &[WordTiming],
    aligned: &[WordTiming],
    scope: Scope,
    matches_only: bool,
) -> Result<Vec<ScoredPair>> {
    let around = match scope {
        Scope::AllWords => None,
        Scope::AroundUntranscribed => Some(neighbors_of_untranscribed(pairs)),
    };
    let mut out = Vec::new();
    for p in pairs {
        let (Some(r), Some(h)) = (p.ref_index, p.hyp_index) else { continue };
        if matches_only && p.op != EditOp::Match {
            continue;
        }
        if around.as_ref().is_some_and(|set| !set.contains(&r)) {
            continue;
        }
        let Some(rt) = reference.get(r) else { continue };
        let Some(ht) = aligned.iter().find(|t| t.word_index == h) else { continue };
        out.push(ScoredPair::new(rt.clone(), ht.clone())?);
    }
    Ok(out)
}

pub fn summarize(
    pairs: &[WordAlignmentPair],
    reference: &[WordTiming],
    aligned: &[WordTiming],
    scope: Scope,
    matches_only: bool,
) -> Result<ScoreSummary> {
    let mut acc = ScoreAccumulator::default();
    for p in score_pairs(pairs, reference, aligned, scope, matches_only)? {
        acc.add(&p);
    }
    acc.finish(scope)
}
