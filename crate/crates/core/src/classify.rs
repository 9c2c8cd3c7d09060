//! Gap classification: a blank-mass baseline, externally produced predictions, training
//! datasets and evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaps::{Gap, GapLabel};
use crate::io::EmissionMatrix;

pub const DEFAULT_BASELINE_THRESHOLD: f64 = 0.5;

/// Frames `[first, last)` whose boundaries are nearest the gap edges.
fn frame_range(g: &Gap, m: &EmissionMatrix) -> Result<(usize, usize)> {
    let fd = m.frame_duration();
    let to_frame = |t: f64| ((t / fd).round().max(0.0) as usize).min(m.num_frames());
    let (first, last) = (to_frame(g.start), to_frame(g.end));
    if last <= first {
        return Err(Error::EmptyFrameRange {
            start: g.start,
            end: g.end,
        });
    }
    Ok((first, last))
}

/// Scores a gap by its mean non-blank probability; speech when the score is above
/// `threshold`.
pub fn baseline_classify(g: &Gap, m: &EmissionMatrix, threshold: f64) -> Result<(GapLabel, f64)> {
    let (first, last) = frame_range(g, m)?;
    let mass: f64 = (first..last).map(|t| 1.0 - m.blank_logprob(t).exp()).sum();
    let score = mass / (last - first) as f64;
    let label = if score > threshold {
        GapLabel::Speech
    } else {
        GapLabel::Empty
    };
    Ok((label, score))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: GapLabel,
    pub score: f64,
}

/// Predictions keyed by gap id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    pub predictions: BTreeMap<String, Prediction>,
    /// Ids seen more than once; the last line wins.
    pub duplicates: usize,
}

/// Parses `gap_id label score` lines.
pub fn parse_predictions(text: &str) -> Result<PredictionSet> {
    let mut set = PredictionSet::default();
    for (n, line) in text.lines().enumerate() {
        let loc = || format!("line {}", n + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [id, label, score] = fields[..] else {
            return Err(Error::invalid("line", loc(), "expected `gap_id label score`"));
        };
        let label: GapLabel = label.parse().map_err(|e: String| Error::invalid("label", loc(), e))?;
        let score: f64 = score
            .parse()
            .map_err(|e| Error::invalid("score", loc(), format!("{e}")))?;
        if set
            .predictions
            .insert(id.to_string(), Prediction { label, score })
            .is_some()
        {
            set.duplicates += 1;
        }
    }
    if set.duplicates > 0 {
        log::warn!("{} duplicate prediction id(s); kept the last of each", set.duplicates);
    }
    Ok(set)
}

/// Checks that the predictions cover exactly the given gap ids.
pub fn check_prediction_ids<'a>(set: &PredictionSet, gap_ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut expected: Vec<&str> = gap_ids.into_iter().collect();
    expected.sort_unstable();
    if let Some(missing) = expected.iter().find(|id| !set.predictions.contains_key(**id)) {
        return Err(Error::MissingGapId(missing.to_string()));
    }
    if let Some(unknown) = set
        .predictions
        .keys()
        .find(|id| expected.binary_search(&id.as_str()).is_err())
    {
        return Err(Error::UnknownGapId(unknown.clone()));
    }
    Ok(())
}

pub fn load_predictions<'a>(path: impl AsRef<Path>, gap_ids: impl IntoIterator<Item = &'a str>) -> Result<PredictionSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let set = parse_predictions(&text)?;
    check_prediction_ids(&set, gap_ids)?;
    Ok(set)
}

pub fn format_predictions(predictions: &BTreeMap<String, Prediction>) -> String {
    let mut out = String::new();
    for (id, p) in predictions {
        let _ = writeln!(out, "{id} {} {}", p.label, p.score);
    }
    out
}

/// One labelled gap for classifier training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapDatasetRow {
    pub utterance: String,
    pub start: f64,
    pub end: f64,
    pub label: GapLabel,
}

/// Shuffles rows with a seeded generator and puts the first `round(n × fraction)` into the
/// training split.
pub fn split_dataset(mut rows: Vec<GapDatasetRow>, fraction: f64, seed: u64) -> Result<(Vec<GapDatasetRow>, Vec<GapDatasetRow>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid("split_fraction", "argument", "must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    let n_train = (rows.len() as f64 * fraction).round() as usize;
    let test = rows.split_off(n_train);
    Ok((rows, test))
}

/// `utterance_id start end label` lines.
pub fn format_dataset(rows: &[GapDatasetRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "{} {} {} {}", r.utterance, r.start, r.end, r.label);
    }
    out
}

pub fn parse_dataset(text: &str) -> Result<Vec<GapDatasetRow>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let loc = || format!("line {}", n + 1);
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [utt, start, end, label] = fields[..] else {
                return Err(Error::invalid("line", loc(), "expected `utterance_id start end label`"));
            };
            Ok(GapDatasetRow {
                utterance: utt.to_string(),
                start: start.parse().map_err(|e| Error::invalid("start", loc(), format!("{e}")))?,
                end: end.parse().map_err(|e| Error::invalid("end", loc(), format!("{e}")))?,
                label: label.parse().map_err(|e: String| Error::invalid("label", loc(), e))?,
            })
        })
        .collect()
}

/// Binary classification quality with speech as the positive class. Ratios whose
/// denominator is zero are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMetrics {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ClassifierMetrics {
    pub fn from_confusion(tp: usize, fp: usize, fn_: usize, tn: usize) -> Result<Self> {
        let total = tp + fp + fn_ + tn;
        if total == 0 {
            return Err(Error::EmptyEvaluation);
        }
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        Ok(Self {
            accuracy: (tp + tn) as f64 / total as f64,
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            tn,
        })
    }
}

/// Compares predictions with reference labels; both maps must have the same keys.
pub fn eval_classifier(
    predictions: &BTreeMap<String, GapLabel>,
    labels: &BTreeMap<String, GapLabel>,
) -> Result<ClassifierMetrics> {
    if let Some(id) = predictions.keys().find(|k| !labels.contains_key(*k)) {
        return Err(Error::SetMismatch(id.clone()));
    }
    if let Some(id) = labels.keys().find(|k| !predictions.contains_key(*k)) {
        return Err(Error::SetMismatch(id.clone()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (id, truth) in labels {
        match (predictions[id], truth) {
            (GapLabel::Speech, GapLabel::Speech) => tp += 1,
            (GapLabel::Speech, GapLabel::Empty) => fp += 1,
            (GapLabel::Empty, GapLabel::Speech) => fn_ += 1,
            (GapLabel::Empty, GapLabel::Empty) => tn += 1,
        }
    }
    ClassifierMetrics::from_confusion(tp, fp, fn_, tn)
}
