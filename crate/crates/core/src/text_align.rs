//! Word-level Levenshtein alignment, WER and transcription-status counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditOp {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// One step of a reference/hypothesis alignment. Deletions carry only `ref_index`,
/// insertions only `hyp_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordAlignmentPair {
    pub op: EditOp,
    pub ref_index: Option<usize>,
    pub hyp_index: Option<usize>,
}

impl WordAlignmentPair {
    /// Both sides carry a word (match or substitution).
    pub fn is_aligned(&self) -> bool {
        matches!(self.op, EditOp::Match | EditOp::Substitute)
    }
}

fn same_word(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

/// Minimum unit-cost edit alignment. Backtrace prefers match/substitute, then delete, then
/// insert.
pub fn levenshtein_align<R: AsRef<str>, H: AsRef<str>>(reference: &[R], hyp: &[H]) -> Vec<WordAlignmentPair> {
    let n = reference.len();
    let m = hyp.len();
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for (j, cell) in d.iter_mut().take(w).enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = usize::from(!same_word(reference[i - 1].as_ref(), hyp[j - 1].as_ref()));
            d[i * w + j] = (d[(i - 1) * w + j - 1] + sub)
                .min(d[(i - 1) * w + j] + 1)
                .min(d[i * w + j - 1] + 1);
        }
    }

    let mut pairs = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let equal = same_word(reference[i - 1].as_ref(), hyp[j - 1].as_ref());
            if d[i * w + j] == d[(i - 1) * w + j - 1] + usize::from(!equal) {
                pairs.push(WordAlignmentPair {
                    op: if equal { EditOp::Match } else { EditOp::Substitute },
                    ref_index: Some(i - 1),
                    hyp_index: Some(j - 1),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i * w + j] == d[(i - 1) * w + j] + 1 {
            pairs.push(WordAlignmentPair {
                op: EditOp::Delete,
                ref_index: Some(i - 1),
                hyp_index: None,
            });
            i -= 1;
        } else {
            pairs.push(WordAlignmentPair {
                op: EditOp::Insert,
                ref_index: None,
                hyp_index: Some(j - 1),
            });
            j -= 1;
        }
    }
    pairs.reverse();
    pairs
}

/// Error counts over an alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditCounts {
    pub matches: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
}

impl EditCounts {
    pub fn from_pairs(pairs: &[WordAlignmentPair]) -> Self {
        let mut c = Self::default();
        for p in pairs {
            match p.op {
                EditOp::Match => c.matches += 1,
                EditOp::Substitute => c.substitutions += 1,
                EditOp::Delete => c.deletions += 1,
                EditOp::Insert => c.insertions += 1,
            }
        }
        c
    }

    pub fn distance(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn reference_words(&self) -> usize {
        self.matches + self.substitutions + self.deletions
    }

    pub fn merge(&mut self, other: &Self) {
        self.matches += other.matches;
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
    }

    /// `(S + D + I) / N`.
    pub fn wer(&self) -> Result<f64> {
        match self.reference_words() {
            0 => Err(Error::EmptyReference),
            n => Ok(self.distance() as f64 / n as f64),
        }
    }
}

pub fn wer<R: AsRef<str>, H: AsRef<str>>(reference: &[R], hyp: &[H]) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    EditCounts::from_pairs(&levenshtein_align(reference, hyp)).wer()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptionRow {
    pub correctly_transcribed: usize,
    pub incorrectly_transcribed: usize,
    pub untranscribed: usize,
}

impl TranscriptionRow {
    pub fn total(&self) -> usize {
        self.correctly_transcribed + self.incorrectly_transcribed + self.untranscribed
    }

    fn merge(&mut self, o: &Self) {
        self.correctly_transcribed += o.correctly_transcribed;
        self.incorrectly_transcribed += o.incorrectly_transcribed;
        self.untranscribed += o.untranscribed;
    }
}

/// Reference words by fluency and transcription status.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorizationCounts {
    pub fluent: TranscriptionRow,
    pub disfluent: TranscriptionRow,
}

impl CategorizationCounts {
    pub fn total(&self) -> usize {
        self.fluent.total() + self.disfluent.total()
    }

    pub fn merge(&mut self, o: &Self) {
        self.fluent.merge(&o.fluent);
        self.disfluent.merge(&o.disfluent);
    }
}

/// Buckets every reference word by its disfluency flag and edit operation. Insertions have
/// no reference word and are ignored.
pub fn categorize_words(pairs: &[WordAlignmentPair], disfluent: &[bool]) -> Result<CategorizationCounts> {
    let ref_words = pairs.iter().filter(|p| p.ref_index.is_some()).count();
    if ref_words != disfluent.len() {
        return Err(Error::LengthMismatch {
            what: "reference words vs disfluency flags",
            left: ref_words,
            right: disfluent.len(),
        });
    }
    let mut counts = CategorizationCounts::default();
    for p in pairs {
        let Some(r) = p.ref_index else { continue };
        let row = if disfluent[r] {
            &mut counts.disfluent
        } else {
            &mut counts.fluent
        };
        match p.op {
            EditOp::Match => row.correctly_transcribed += 1,
            EditOp::Substitute => row.incorrectly_transcribed += 1,
            EditOp::Delete => row.untranscribed += 1,
            EditOp::Insert => unreachable!("insertions carry no reference index"),
        }
    }
    Ok(counts)
}

/// Reference indices of matched or substituted words directly next to a deleted word.
pub fn neighbors_of_untranscribed(pairs: &[WordAlignmentPair]) -> BTreeSet<usize> {
    let mut by_ref: Vec<(usize, EditOp)> = pairs
        .iter()
        .filter_map(|p| p.ref_index.map(|r| (r, p.op)))
        .collect();
    by_ref.sort_unstable_by_key(|&(r, _)| r);
    let mut out = BTreeSet::new();
    for (k, &(_, op)) in by_ref.iter().enumerate() {
        if op != EditOp::Delete {
            continue;
        }
        let mut take = |i: usize| {
            let (r, op) = by_ref[i];
            if op != EditOp::Delete {
                out.insert(r);
            }
        };
        if k > 0 {
            take(k - 1);
        }
        if k + 1 < by_ref.len() {
            take(k + 1);
        }
    }
    out
}
