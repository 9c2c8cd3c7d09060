//! Corpus-level orchestration: alignment, gap detection, classification and the evaluation
//! report.
//!
//! Utterances are processed in parallel; every aggregate is folded in manifest order so
//! reports are byte-identical across runs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{align_ctc, align_dtw_attention, Variant, WordTiming};
use crate::classify::{
    baseline_classify, check_prediction_ids, eval_classifier, split_dataset, ClassifierMetrics,
    GapDatasetRow, PredictionSet, DEFAULT_BASELINE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::gaps::{
    coverage_with_threshold, detection_counts, extract_gaps, label_gap, unclassified, ClassCoverage,
    DetectionTable, Gap, GapLabel, DEFAULT_MIN_GAP, DEFAULT_OVERLAP_THRESHOLD,
};
use crate::io::{
    read_attention, read_emissions, read_hyp_transcript, read_ref_transcript, write_attention,
    write_emissions, write_hyp_transcript, write_ref_transcript, AttentionMatrix, EmissionMatrix,
    HypTranscript, RefWord,
};
use crate::metrics::{score_pairs, ScoreAccumulator, Scope};
use crate::segment::SegmentConfig;
use crate::synthetic::SyntheticUtterance;
use crate::text_align::{categorize_words, levenshtein_align, CategorizationCounts, EditCounts, WordAlignmentPair};

pub const DEFAULT_C: f64 = -0.01;
pub const C_SWEEP: [f64; 8] = [-5.0, -4.0, -3.0, -2.0, -1.0, -0.5, -0.1, -0.01];
pub const MIN_GAP_SWEEP: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Standard,
    Modified,
    Attention,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Standard => "standard",
            Method::Modified => "modified",
            Method::Attention => "attention",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(Method::Standard),
            "modified" => Ok(Method::Modified),
            "attention" => Ok(Method::Attention),
            other => Err(format!("unknown method {other:?} (standard, modified, attention)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Baseline,
    External,
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(ClassifierKind::Baseline),
            "external" => Ok(ClassifierKind::External),
            other => Err(format!("unknown classifier {other:?} (baseline, external)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Log-probability floor for staying on a separator.
    pub c: f64,
    pub min_gap: f64,
    pub overlap_threshold: f64,
    pub classifier: ClassifierKind,
    pub baseline_threshold: f64,
    pub segment: SegmentConfig,
    pub seed: u64,
    pub split_fraction: f64,
    pub matches_only: bool,
    /// Aligners compared in score and coverage tables.
    pub methods: Vec<Method>,
    /// Aligner whose gaps are classified.
    pub gap_method: Method,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            c: DEFAULT_C,
            min_gap: DEFAULT_MIN_GAP,
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            classifier: ClassifierKind::Baseline,
            baseline_threshold: DEFAULT_BASELINE_THRESHOLD,
            segment: SegmentConfig::default(),
            seed: 0,
            split_fraction: 0.8,
            matches_only: false,
            methods: vec![Method::Standard, Method::Modified, Method::Attention],
            gap_method: Method::Modified,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: &str| Err(Error::invalid(field, "config", reason));
        if self.c.is_nan() || self.c > 0.0 {
            return bad("c", "must be a log-probability (<= 0)");
        }
        if self.min_gap.is_nan() || self.min_gap <= 0.0 {
            return bad("min_gap", "must be positive");
        }
        if !(0.0..1.0).contains(&self.overlap_threshold) || self.overlap_threshold == 0.0 {
            return bad("overlap_threshold", "must lie strictly between 0 and 1");
        }
        if !(0.0..=1.0).contains(&self.split_fraction) {
            return bad("split_fraction", "must lie in [0, 1]");
        }
        let s = &self.segment;
        if !(s.silence_split > 0.0 && s.max_segment > 0.0 && s.min_edge_distance >= 0.0) {
            return bad("segment", "thresholds must be positive");
        }
        Ok(())
    }

    pub fn variant(&self, method: Method) -> Option<Variant> {
        match method {
            Method::Standard => Some(Variant::Standard),
            Method::Modified => Some(Variant::Modified { c: self.c }),
            Method::Attention => None,
        }
    }
}

/// One manifest line: `id emissions hypothesis reference [attention]`, `-` for absent files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtteranceEntry {
    pub id: String,
    pub emissions: PathBuf,
    pub hypothesis: PathBuf,
    pub reference: Option<PathBuf>,
    pub attention: Option<PathBuf>,
}

/// Relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<UtteranceEntry>> {
    let resolve = |p: &str| -> Option<PathBuf> { (p != "-").then(|| base.join(p)) };
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (n, line) in text.lines().enumerate() {
        let loc = || format!("line {}", n + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if !(4..=5).contains(&f.len()) {
            return Err(Error::invalid(
                "manifest",
                loc(),
                "expected `id emissions hypothesis reference [attention]`",
            ));
        }
        if !seen.insert(f[0].to_string()) {
            return Err(Error::invalid("id", loc(), format!("duplicate utterance id {}", f[0])));
        }
        entries.push(UtteranceEntry {
            id: f[0].to_string(),
            emissions: resolve(f[1]).ok_or_else(|| Error::invalid("emissions", loc(), "required"))?,
            hypothesis: resolve(f[2]).ok_or_else(|| Error::invalid("hypothesis", loc(), "required"))?,
            reference: resolve(f[3]),
            attention: f.get(4).and_then(|p| resolve(p)),
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<UtteranceEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}

#[derive(Debug, Clone)]
pub struct Utterance {
    pub id: String,
    pub emissions: EmissionMatrix,
    pub hypothesis: HypTranscript,
    pub reference: Option<Vec<RefWord>>,
    pub attention: Option<AttentionMatrix>,
}

impl Utterance {
    pub fn load(entry: &UtteranceEntry) -> Result<Self> {
        Ok(Self {
            id: entry.id.clone(),
            emissions: read_emissions(&entry.emissions)?,
            hypothesis: read_hyp_transcript(&entry.hypothesis)?,
            reference: entry.reference.as_ref().map(read_ref_transcript).transpose()?,
            attention: entry.attention.as_ref().map(read_attention).transpose()?,
        })
    }

    fn reference(&self) -> Result<&[RefWord]> {
        self.reference
            .as_deref()
            .ok_or_else(|| Error::invalid("reference", self.id.clone(), "no reference transcript"))
    }

    /// Word timings from one aligner.
    pub fn align(&self, method: Method, c: f64) -> Result<Vec<WordTiming>> {
        match method {
            Method::Standard => align_ctc(&self.emissions, &self.hypothesis, Variant::Standard),
            Method::Modified => align_ctc(&self.emissions, &self.hypothesis, Variant::modified(c)?),
            Method::Attention => {
                let a = self.attention.as_ref().ok_or_else(|| {
                    Error::invalid("attention", self.id.clone(), "no attention matrix")
                })?;
                Ok(align_dtw_attention(a))
            }
        }
    }

    /// Gaps of at least `min_gap` in the audio covered by the emissions.
    pub fn gaps(&self, timings: &[WordTiming], min_gap: f64) -> Vec<Gap> {
        extract_gaps(timings, self.emissions.duration(), min_gap)
    }
}

/// Loads every entry, keeping per-utterance failures.
pub fn load_corpus(entries: &[UtteranceEntry]) -> (Vec<Utterance>, Vec<Failure>) {
    let loaded: Vec<_> = entries.par_iter().map(|e| (e.id.clone(), Utterance::load(e))).collect();
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (id, r) in loaded {
        match r {
            Ok(u) => ok.push(u),
            Err(e) => failures.push(Failure::new(&id, None, &e)),
        }
    }
    (ok, failures)
}

/// A per-utterance error that did not stop the batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub utterance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub error: String,
    pub message: String,
}

impl Failure {
    pub fn new(utterance: &str, method: Option<Method>, e: &Error) -> Self {
        Self {
            utterance: utterance.to_string(),
            method,
            error: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub id: String,
    pub utterance: String,
    pub start: f64,
    pub end: f64,
    pub label: Option<GapLabel>,
    pub predicted: Option<GapLabel>,
    pub score: Option<f64>,
}

impl GapRecord {
    fn gap(&self) -> Gap {
        Gap {
            start: self.start,
            end: self.end,
            label: self.label,
            predicted: self.predicted,
            score: self.score,
        }
    }
}

pub fn gap_id(utterance: &str, k: usize) -> String {
    format!("{utterance}/{k}")
}

/// Gaps of the configured aligner, labelled against the reference when there is one.
pub fn utterance_gaps(u: &Utterance, cfg: &PipelineConfig) -> Result<Vec<GapRecord>> {
    let timings = u.align(cfg.gap_method, cfg.c)?;
    Ok(u.gaps(&timings, cfg.min_gap)
        .into_iter()
        .enumerate()
        .map(|(k, g)| GapRecord {
            id: gap_id(&u.id, k),
            utterance: u.id.clone(),
            start: g.start,
            end: g.end,
            label: u
                .reference
                .as_deref()
                .map(|r| label_gap(&g, r, cfg.overlap_threshold)),
            predicted: None,
            score: None,
        })
        .collect())
}

/// Fills `predicted` and `score` on every gap, from external predictions when given and the
/// blank-mass baseline otherwise.
pub fn classify_gaps(
    gaps: &mut [GapRecord],
    corpus: &[Utterance],
    cfg: &PipelineConfig,
    external: Option<&PredictionSet>,
) -> Result<()> {
    if let Some(set) = external {
        check_prediction_ids(set, gaps.iter().map(|g| g.id.as_str()))?;
        for g in gaps.iter_mut() {
            let p = set.predictions[&g.id];
            g.predicted = Some(p.label);
            g.score = Some(p.score);
        }
        return Ok(());
    }
    let by_id: BTreeMap<&str, &Utterance> = corpus.iter().map(|u| (u.id.as_str(), u)).collect();
    for g in gaps.iter_mut() {
        let u = by_id[g.utterance.as_str()];
        let (label, score) = baseline_classify(&g.gap(), &u.emissions, cfg.baseline_threshold)?;
        g.predicted = Some(label);
        g.score = Some(score);
    }
    Ok(())
}

/// Metrics over every gap carrying both a reference label and a prediction.
pub fn gap_metrics(gaps: &[GapRecord]) -> Option<ClassifierMetrics> {
    let mut truth = BTreeMap::new();
    let mut pred = BTreeMap::new();
    for g in gaps {
        if let (Some(l), Some(p)) = (g.label, g.predicted) {
            truth.insert(g.id.clone(), l);
            pred.insert(g.id.clone(), p);
        }
    }
    eval_classifier(&pred, &truth).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub gaps: Vec<GapRecord>,
    pub classifier: Option<ClassifierMetrics>,
    pub failures: Vec<Failure>,
}

pub fn classify_corpus(
    corpus: &[Utterance],
    cfg: &PipelineConfig,
    external: Option<&PredictionSet>,
) -> Result<ClassificationReport> {
    cfg.validate()?;
    let per_utt: Vec<_> = corpus.par_iter().map(|u| utterance_gaps(u, cfg)).collect();
    let mut gaps = Vec::new();
    let mut failures = Vec::new();
    for (u, r) in corpus.iter().zip(per_utt) {
        match r {
            Ok(g) => gaps.extend(g),
            Err(e) => failures.push(Failure::new(&u.id, Some(cfg.gap_method), &e)),
        }
    }
    classify_gaps(&mut gaps, corpus, cfg, external)?;
    Ok(ClassificationReport {
        classifier: gap_metrics(&gaps),
        gaps,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<GapDatasetRow>,
    pub test: Vec<GapDatasetRow>,
    pub failures: Vec<Failure>,
}

/// Labelled gaps of every utterance with a reference, shuffled by `cfg.seed` and split by
/// `cfg.split_fraction`.
pub fn build_gap_dataset(corpus: &[Utterance], cfg: &PipelineConfig) -> Result<DatasetSplit> {
    cfg.validate()?;
    let per_utt: Vec<_> = corpus
        .par_iter()
        .map(|u| {
            u.reference()?;
            utterance_gaps(u, cfg)
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (u, r) in corpus.iter().zip(per_utt) {
        match r {
            Ok(gaps) => rows.extend(gaps.into_iter().map(|g| GapDatasetRow {
                utterance: g.utterance,
                start: g.start,
                end: g.end,
                label: g.label.expect("reference present"),
            })),
            Err(e) => failures.push(Failure::new(&u.id, Some(cfg.gap_method), &e)),
        }
    }
    let (train, test) = split_dataset(rows, cfg.split_fraction, cfg.seed)?;
    Ok(DatasetSplit { train, test, failures })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    pub matches: usize,
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_words: usize,
    pub wer: Option<f64>,
}

impl From<EditCounts> for WerReport {
    fn from(c: EditCounts) -> Self {
        Self {
            matches: c.matches,
            substitutions: c.substitutions,
            deletions: c.deletions,
            insertions: c.insertions,
            reference_words: c.reference_words(),
            wer: c.wer().ok(),
        }
    }
}

/// One row of the method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub method: Method,
    pub scope: Scope,
    pub position: f64,
    pub length: f64,
    pub combined: f64,
    pub pairs: usize,
}

/// Reference words inside the gaps of one aligner at one minimum gap length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCoverage {
    pub method: Method,
    pub min_gap: f64,
    pub untranscribed: ClassCoverage,
    pub transcribed: ClassCoverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: PipelineConfig,
    pub utterances: usize,
    pub failures: Vec<Failure>,
    pub wer: WerReport,
    pub categorization: CategorizationCounts,
    pub alignment_scores: Vec<MethodScores>,
    pub method_coverage: Vec<MethodCoverage>,
    pub gaps: Vec<GapRecord>,
    pub classifier: Option<ClassifierMetrics>,
    pub detection: DetectionTable,
}

fn ref_timings(words: &[RefWord]) -> Vec<WordTiming> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| WordTiming::new(i, w.text.clone(), w.start, w.end))
        .collect()
}

#[derive(Debug, Default)]
struct MethodStats {
    all: ScoreAccumulator,
    around: ScoreAccumulator,
    coverage: Vec<(ClassCoverage, ClassCoverage)>,
}

fn method_stats(
    u: &Utterance,
    pairs: &[WordAlignmentPair],
    timings: &[WordTiming],
    min_gaps: &[f64],
    cfg: &PipelineConfig,
) -> Result<MethodStats> {
    let reference = u.reference()?;
    let rt = ref_timings(reference);
    let mut stats = MethodStats::default();
    for p in score_pairs(pairs, &rt, timings, Scope::AllWords, cfg.matches_only)? {
        stats.all.add(&p);
    }
    for p in score_pairs(pairs, &rt, timings, Scope::AroundUntranscribed, cfg.matches_only)? {
        stats.around.add(&p);
    }
    for &mg in min_gaps {
        let cov = coverage_with_threshold(&u.gaps(timings, mg), reference, pairs, cfg.overlap_threshold);
        stats.coverage.push((cov.untranscribed, cov.transcribed));
    }
    Ok(stats)
}

struct UtteranceOutcome {
    pairs: Vec<WordAlignmentPair>,
    categorization: CategorizationCounts,
    methods: Vec<(Method, Result<MethodStats>)>,
    gaps: Result<Vec<GapRecord>>,
}

fn evaluate_utterance(u: &Utterance, cfg: &PipelineConfig) -> Result<UtteranceOutcome> {
    let reference = u.reference()?;
    let ref_text: Vec<&str> = reference.iter().map(|w| w.text.as_str()).collect();
    let pairs = levenshtein_align(&ref_text, u.hypothesis.words());
    let flags: Vec<bool> = reference.iter().map(|w| w.disfluent).collect();
    let categorization = categorize_words(&pairs, &flags)?;
    let methods = cfg
        .methods
        .iter()
        .map(|&m| {
            let stats = u
                .align(m, cfg.c)
                .and_then(|t| method_stats(u, &pairs, &t, &[cfg.min_gap], cfg));
            (m, stats)
        })
        .collect();
    Ok(UtteranceOutcome {
        gaps: utterance_gaps(u, cfg),
        pairs,
        categorization,
        methods,
    })
}

/// Runs the full pipeline over a loaded corpus. `load_failures` are carried into the report.
pub fn evaluate(
    corpus: &[Utterance],
    cfg: &PipelineConfig,
    external: Option<&PredictionSet>,
    load_failures: Vec<Failure>,
) -> Result<EvaluationReport> {
    cfg.validate()?;
    let outcomes: Vec<_> = corpus.par_iter().map(|u| evaluate_utterance(u, cfg)).collect();

    let mut failures = load_failures;
    let mut edits = EditCounts::default();
    let mut categorization = CategorizationCounts::default();
    let mut scores: BTreeMap<Method, (ScoreAccumulator, ScoreAccumulator)> = BTreeMap::new();
    let mut coverage: BTreeMap<Method, (ClassCoverage, ClassCoverage)> = BTreeMap::new();
    let mut gaps = Vec::new();
    // Utterances whose gaps were extracted, with their alignment pairs, in manifest order.
    let mut classified: Vec<(usize, Vec<WordAlignmentPair>, Range)> = Vec::new();
    let mut unaligned: Vec<Vec<WordAlignmentPair>> = Vec::new();

    for (idx, (u, outcome)) in corpus.iter().zip(outcomes).enumerate() {
        let outcome = match outcome {
            Ok(o) => o,
            Err(e) => {
                failures.push(Failure::new(&u.id, None, &e));
                continue;
            }
        };
        edits.merge(&EditCounts::from_pairs(&outcome.pairs));
        categorization.merge(&outcome.categorization);
        for (m, stats) in outcome.methods {
            match stats {
                Ok(s) => {
                    let entry = scores.entry(m).or_default();
                    entry.0.merge(&s.all);
                    entry.1.merge(&s.around);
                    let cov = coverage.entry(m).or_default();
                    cov.0.merge(&s.coverage[0].0);
                    cov.1.merge(&s.coverage[0].1);
                }
                Err(e) => failures.push(Failure::new(&u.id, Some(m), &e)),
            }
        }
        match outcome.gaps {
            Ok(g) => {
                let range = Range {
                    start: gaps.len(),
                    end: gaps.len() + g.len(),
                };
                gaps.extend(g);
                classified.push((idx, outcome.pairs, range));
            }
            Err(e) => {
                failures.push(Failure::new(&u.id, Some(cfg.gap_method), &e));
                unaligned.push(outcome.pairs);
            }
        }
    }

    classify_gaps(&mut gaps, corpus, cfg, external)?;

    let mut detection = DetectionTable::default();
    for (idx, pairs, range) in &classified {
        let utt_gaps: Vec<Gap> = gaps[range.start..range.end].iter().map(GapRecord::gap).collect();
        let reference = corpus[*idx].reference()?;
        detection.merge(&detection_counts(&utt_gaps, reference, pairs, cfg.overlap_threshold));
    }
    for pairs in &unaligned {
        detection.merge(&unclassified(pairs));
    }

    let mut alignment_scores = Vec::new();
    for (&method, (all, around)) in &scores {
        for (scope, acc) in [(Scope::AllWords, all), (Scope::AroundUntranscribed, around)] {
            if let Ok(s) = acc.finish(scope) {
                alignment_scores.push(MethodScores {
                    method,
                    scope,
                    position: s.position,
                    length: s.length,
                    combined: s.combined,
                    pairs: s.pairs,
                });
            }
        }
    }
    let method_coverage = coverage
        .into_iter()
        .map(|(method, (untranscribed, transcribed))| MethodCoverage {
            method,
            min_gap: cfg.min_gap,
            untranscribed,
            transcribed,
        })
        .collect();

    Ok(EvaluationReport {
        config: cfg.clone(),
        utterances: corpus.len(),
        failures,
        wer: edits.into(),
        categorization,
        alignment_scores,
        method_coverage,
        classifier: gap_metrics(&gaps),
        gaps,
        detection,
    })
}

#[derive(Debug, Clone, Copy)]
struct Range {
    start: usize,
    end: usize,
}

#[derive(Default)]
struct SeriesCell {
    untranscribed: ClassCoverage,
    transcribed: ClassCoverage,
    all: ScoreAccumulator,
    around: ScoreAccumulator,
}

fn fmt_mean(acc: &ScoreAccumulator, scope: Scope) -> String {
    acc.finish(scope).map(|s| format!("{:.6}", s.combined)).unwrap_or_default()
}

/// Plot-ready CSV of coverage against minimum gap length for every configured aligner, and of
/// coverage and combined scores against `c` for the modified aligner.
pub fn sweep_csv(corpus: &[Utterance], cfg: &PipelineConfig) -> Result<String> {
    cfg.validate()?;
    let mut cells: BTreeMap<(u8, Method, usize), SeriesCell> = BTreeMap::new();
    let mut jobs: Vec<(u8, Method, f64, Vec<f64>)> = cfg
        .methods
        .iter()
        .map(|&m| (0u8, m, cfg.c, MIN_GAP_SWEEP.to_vec()))
        .collect();
    jobs.extend(C_SWEEP.iter().map(|&c| (1u8, Method::Modified, c, vec![cfg.min_gap])));

    let results: Vec<Vec<Option<MethodStats>>> = corpus
        .par_iter()
        .map(|u| {
            let ref_text: Vec<&str> = match u.reference() {
                Ok(r) => r.iter().map(|w| w.text.as_str()).collect(),
                Err(_) => return Vec::new(),
            };
            let pairs = levenshtein_align(&ref_text, u.hypothesis.words());
            jobs.iter()
                .map(|(_, m, c, mgs)| {
                    u.align(*m, *c)
                        .and_then(|t| method_stats(u, &pairs, &t, mgs, cfg))
                        .ok()
                })
                .collect()
        })
        .collect();

    for per_utt in &results {
        for (j, stats) in per_utt.iter().enumerate() {
            let Some(s) = stats else { continue };
            let (series, method, _, mgs) = &jobs[j];
            for (k, (unt, tra)) in s.coverage.iter().enumerate() {
                let key_param = if *series == 0 { k } else { j };
                let _ = mgs;
                let cell = cells.entry((*series, *method, key_param)).or_default();
                cell.untranscribed.merge(unt);
                cell.transcribed.merge(tra);
                cell.all.merge(&s.all);
                cell.around.merge(&s.around);
            }
        }
    }

    let mut out = String::from(
        "series,method,parameter,untranscribed_covered,untranscribed_total,transcribed_covered,transcribed_total,combined_all_words,combined_around_untranscribed\n",
    );
    for ((series, method, k), cell) in &cells {
        let (name, param) = if *series == 0 {
            ("min_gap", MIN_GAP_SWEEP[*k])
        } else {
            ("c", jobs[*k].2)
        };
        let _ = writeln!(
            out,
            "{name},{method},{param},{},{},{},{},{},{}",
            cell.untranscribed.covered,
            cell.untranscribed.total(),
            cell.transcribed.covered,
            cell.transcribed.total(),
            fmt_mean(&cell.all, Scope::AllWords),
            fmt_mean(&cell.around, Scope::AroundUntranscribed),
        );
    }
    Ok(out)
}

impl From<SyntheticUtterance> for Utterance {
    fn from(s: SyntheticUtterance) -> Self {
        Self {
            id: s.id,
            emissions: s.emissions,
            hypothesis: s.hypothesis,
            reference: Some(s.reference),
            attention: Some(s.attention),
        }
    }
}

/// Writes `utterances` under `dir` with a `manifest.txt` listing them; returns the manifest path.
pub fn write_corpus(utterances: &[SyntheticUtterance], dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::from("# id emissions hypothesis reference attention\n");
    for u in utterances {
        let names = [
            format!("{}.em", u.id),
            format!("{}.hyp.txt", u.id),
            format!("{}.ref.txt", u.id),
            format!("{}.attn", u.id),
        ];
        write_emissions(&u.emissions, dir.join(&names[0]))?;
        write_hyp_transcript(&u.hypothesis, dir.join(&names[1]))?;
        write_ref_transcript(&u.reference, dir.join(&names[2]))?;
        write_attention(&u.attention, dir.join(&names[3]))?;
        let _ = writeln!(manifest, "{} {}", u.id, names.join(" "));
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
