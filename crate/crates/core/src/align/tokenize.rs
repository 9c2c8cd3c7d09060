use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{EmissionMatrix, HypTranscript};

/// Token range `[first, last]` (inclusive) holding one hypothesis word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSpan {
    pub first: usize,
    pub last: usize,
    pub word_index: usize,
}

/// A transcript rendered as vocabulary indices: a leading separator, then each word's
/// characters, with exactly one separator between consecutive words.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    tokens: Vec<usize>,
    is_separator: Vec<bool>,
    word_spans: Vec<WordSpan>,
    words: Vec<String>,
    dropped_chars: usize,
}

impl TokenSequence {
    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn is_separator(&self, j: usize) -> bool {
        self.is_separator[j]
    }

    pub fn word_spans(&self) -> &[WordSpan] {
        &self.word_spans
    }

    /// Hypothesis words, indexed by `WordSpan::word_index`.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Characters dropped because the vocabulary has no token for them.
    pub fn dropped_chars(&self) -> usize {
        self.dropped_chars
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Maps hypothesis characters onto the emission vocabulary. Characters without a
/// single-character vocabulary entry are dropped and counted; a word that loses all of its
/// characters gets no span.
pub fn tokenize(hyp: &HypTranscript, m: &EmissionMatrix) -> Result<TokenSequence> {
    let blank = m.blank_index();
    let sep = m.separator_index();
    let mut lookup: HashMap<char, usize> = HashMap::new();
    for (i, entry) in m.vocab().iter().enumerate() {
        if i == blank || i == sep {
            continue;
        }
        let lower = entry.to_lowercase();
        let mut chars = lower.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            lookup.entry(c).or_insert(i);
        }
    }

    let mut tokens = vec![sep];
    let mut is_separator = vec![true];
    let mut word_spans = Vec::new();
    let mut dropped = 0;
    for (word_index, word) in hyp.words().iter().enumerate() {
        let mapped: Vec<usize> = word
            .chars()
            .flat_map(char::to_lowercase)
            .filter_map(|c| {
                let hit = lookup.get(&c).copied();
                if hit.is_none() {
                    dropped += 1;
                }
                hit
            })
            .collect();
        if mapped.is_empty() {
            continue;
        }
        if !word_spans.is_empty() {
            tokens.push(sep);
            is_separator.push(true);
        }
        let first = tokens.len();
        tokens.extend_from_slice(&mapped);
        is_separator.resize(tokens.len(), false);
        word_spans.push(WordSpan {
            first,
            last: tokens.len() - 1,
            word_index,
        });
    }
    if word_spans.is_empty() {
        return Err(Error::EmptyAfterNormalization);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} character(s) missing from the vocabulary");
    }
    Ok(TokenSequence {
        tokens,
        is_separator,
        word_spans,
        words: hyp.words().to_vec(),
        dropped_chars: dropped,
    })
}
