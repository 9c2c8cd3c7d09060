//! Plain-text transcripts.
//!
//! Reference files hold one word per line: `start end word disfluent_flag`, times in seconds
//! and the flag `0` or `1`. Hypothesis files hold space-separated words.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Character reserved for word boundaries in hypothesis text.
pub const WORD_SEPARATOR: char = '|';

/// A manually annotated reference word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefWord {
    pub text: String,
    pub start: f64,
    pub end: f64,
    pub disfluent: bool,
}

impl RefWord {
    pub fn new(text: impl Into<String>, start: f64, end: f64, disfluent: bool) -> Self {
        Self {
            text: text.into(),
            start,
            end,
            disfluent,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Checks timing invariants on an in-memory reference transcript.
pub fn validate_ref_words(words: &[RefWord]) -> Result<()> {
    let mut prev_end = f64::NEG_INFINITY;
    for (i, w) in words.iter().enumerate() {
        let loc = || format!("word {i}");
        if w.text.is_empty() || w.text.chars().any(char::is_whitespace) {
            return Err(Error::invalid("word", loc(), "must be a single non-empty token"));
        }
        if !(w.start.is_finite() && w.end.is_finite() && w.start < w.end) {
            return Err(Error::invalid("end", loc(), "end must be after start"));
        }
        if w.start < prev_end {
            return Err(Error::invalid(
                "start",
                loc(),
                "words must be sorted and non-overlapping",
            ));
        }
        prev_end = w.end;
    }
    Ok(())
}

pub fn parse_ref_transcript(text: &str) -> Result<Vec<RefWord>> {
    let mut words: Vec<RefWord> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let loc = || format!("line {line_no}");
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [start, end, word, flag] = fields[..] else {
            return Err(Error::invalid(
                "line",
                loc(),
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        let start: f64 = start
            .parse()
            .map_err(|e| Error::invalid("start", loc(), format!("{e}")))?;
        let end: f64 = end
            .parse()
            .map_err(|e| Error::invalid("end", loc(), format!("{e}")))?;
        let disfluent = match flag {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::invalid(
                    "disfluent_flag",
                    loc(),
                    format!("{other:?} is not 0 or 1"),
                ))
            }
        };
        if !(start.is_finite() && end.is_finite() && start < end) {
            return Err(Error::invalid("end", loc(), "end must be after start"));
        }
        if let Some(prev) = words.last() {
            if start < prev.end {
                return Err(Error::invalid(
                    "start",
                    loc(),
                    "words must be sorted and non-overlapping",
                ));
            }
        }
        words.push(RefWord::new(word.to_lowercase(), start, end, disfluent));
    }
    Ok(words)
}

pub fn format_ref_transcript(words: &[RefWord]) -> String {
    let mut out = String::new();
    for w in words {
        let _ = writeln!(out, "{} {} {} {}", w.start, w.end, w.text, u8::from(w.disfluent));
    }
    out
}

pub fn read_ref_transcript(path: impl AsRef<Path>) -> Result<Vec<RefWord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ref_transcript(&text)
}

pub fn write_ref_transcript(words: &[RefWord], path: impl AsRef<Path>) -> Result<()> {
    validate_ref_words(words)?;
    let path = path.as_ref();
    fs::write(path, format_ref_transcript(words)).map_err(|e| Error::io(path, e))
}

/// An ASR hypothesis: lowercase words in spoken order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HypTranscript {
    words: Vec<String>,
}

impl HypTranscript {
    pub fn new<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words = words
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                let w = w.as_ref().to_lowercase();
                if w.is_empty() || w.chars().any(|c| c.is_whitespace() || c == WORD_SEPARATOR) {
                    Err(Error::invalid(
                        "word",
                        format!("word {i}"),
                        format!("{w:?} is empty or contains a separator"),
                    ))
                } else {
                    Ok(w)
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { words })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.split_whitespace())
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

pub fn read_hyp_transcript(path: impl AsRef<Path>) -> Result<HypTranscript> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    HypTranscript::parse(&text)
}

pub fn write_hyp_transcript(hyp: &HypTranscript, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut line = hyp.words.join(" ");
    line.push('\n');
    fs::write(path, line).map_err(|e| Error::io(path, e))
}
