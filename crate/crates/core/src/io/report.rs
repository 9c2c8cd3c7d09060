//! JSON outputs: alignments, reports and other records.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::align::WordTiming;
use crate::error::{Error, Result};

/// Rounds to millisecond precision for rendering.
pub fn round_ms(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_report<T: Serialize + ?Sized>(report: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(report)).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::invalid("document", format!("{}:{}", path.display(), e.line()), e.to_string())
    })
}

#[derive(Serialize, Deserialize)]
struct AlignmentRecord {
    word_index: usize,
    text: String,
    start: f64,
    end: f64,
}

/// Renders word timings with times rounded to milliseconds.
pub fn alignment_json(timings: &[WordTiming]) -> String {
    let records: Vec<AlignmentRecord> = timings
        .iter()
        .map(|w| AlignmentRecord {
            word_index: w.word_index,
            text: w.text.clone(),
            start: round_ms(w.start),
            end: round_ms(w.end),
        })
        .collect();
    to_json(&records)
}

pub fn write_alignment(timings: &[WordTiming], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, alignment_json(timings)).map_err(|e| Error::io(path, e))
}

/// Reads an alignment file, rejecting empty, reversed or overlapping words.
pub fn read_alignment(path: impl AsRef<Path>) -> Result<Vec<WordTiming>> {
    let records: Vec<AlignmentRecord> = read_json(path)?;
    let mut prev_end = f64::NEG_INFINITY;
    let mut prev_index = None;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let loc = format!("record {i}");
            if !(r.start.is_finite() && r.end.is_finite() && r.start < r.end) {
                return Err(Error::invalid("end", loc, "end must be after start"));
            }
            if r.start < prev_end || prev_index.is_some_and(|p| r.word_index <= p) {
                return Err(Error::invalid("start", loc, "records must be ordered and disjoint"));
            }
            prev_end = r.end;
            prev_index = Some(r.word_index);
            Ok(WordTiming::new(r.word_index, r.text, r.start, r.end))
        })
        .collect()
}
