use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gapalign_core::align::{align_ctc, align_dtw_attention, Variant, WordTiming};
use gapalign_core::classify::{baseline_classify, format_dataset, load_predictions, PredictionSet};
use gapalign_core::gaps::{extract_gaps, label_gap};
use gapalign_core::io::{
    alignment_json, read_alignment, read_attention, read_emissions, read_hyp_transcript, read_ref_transcript,
    to_json, write_alignment, HypTranscript,
};
use gapalign_core::metrics::{summarize, Scope};
use gapalign_core::pipeline::{
    build_gap_dataset, classify_corpus, evaluate, load_corpus, read_manifest, sweep_csv, utterance_gaps,
    write_corpus, ClassifierKind, Failure, Method, PipelineConfig, Utterance, WerReport,
};
use gapalign_core::segment::{is_indivisible, plan_segments};
use gapalign_core::synthetic::synthetic_corpus;
use gapalign_core::text_align::{categorize_words, levenshtein_align, EditCounts};
use gapalign_core::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

mod config;

use config::ConfigArgs;

/// Forced alignment of ASR transcripts with detection of untranscribed speech.
#[derive(Debug, Parser)]
#[command(name = "gapalign", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Align a hypothesis transcript to emissions (or attention) and write word timings.
    Align {
        #[arg(long, required_unless_present_any = ["manifest", "attention"])]
        emissions: Option<PathBuf>,
        #[arg(long, required_unless_present_any = ["manifest", "attention"])]
        hyp: Option<PathBuf>,
        #[arg(long, value_parser = parse_method, default_value = "modified")]
        variant: Method,
        /// Cross-attention matrix, for the attention aligner.
        #[arg(long)]
        attention: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(short, long, conflicts_with = "manifest")]
        output: Option<PathBuf>,
        /// Align every utterance of a manifest into --out-dir.
        #[arg(long, requires = "out_dir", conflicts_with_all = ["emissions", "hyp", "attention"])]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// List gaps between aligned words, labelled against a reference when given.
    Gaps {
        #[arg(long)]
        emissions: PathBuf,
        /// Existing alignment; computed with --variant when absent.
        #[arg(long, required_unless_present = "hyp")]
        alignment: Option<PathBuf>,
        #[arg(long)]
        hyp: Option<PathBuf>,
        #[arg(long, value_parser = parse_method, default_value = "modified")]
        variant: Method,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score an alignment against reference word timings.
    Score {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        alignment: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Word error rate and transcription categories of a hypothesis.
    Wer {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Plan segment boundaries for a long recording from its word timings.
    Segment {
        #[arg(long)]
        reference: PathBuf,
        /// Recording length in seconds; defaults to the end of the last word.
        #[arg(long)]
        duration: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Classify the gaps of every utterance in a manifest.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        /// `gap_id label score` lines from an external classifier.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write seeded train and test splits of labelled gaps.
    Dataset {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Full evaluation of a manifest: error rates, alignment scores, gaps and detection counts.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write coverage and score series over minimum gap length and `c` as CSV.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Write a synthetic corpus with planted untranscribed words.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = ErrorRecord {
                error: e.code(),
                message: e.to_string(),
            };
            eprintln!("{}", serde_json::to_string(&record).expect("error record serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.config.resolve()?;
    log::debug!("config: {cfg:?}");
    match cli.command {
        Command::Align {
            emissions,
            hyp,
            variant,
            attention,
            output,
            manifest,
            out_dir,
        } => match (manifest, out_dir) {
            (Some(m), Some(dir)) => align_batch(&m, &dir, variant, &cfg),
            _ => {
                let timings = align_single(
                    emissions.as_deref(),
                    hyp.as_deref(),
                    attention.as_deref(),
                    variant,
                    cfg.c,
                )?;
                emit(&alignment_json(&timings), output.as_deref())
            }
        },
        Command::Gaps {
            emissions,
            alignment,
            hyp,
            variant,
            reference,
            output,
        } => {
            let m = read_emissions(&emissions)?;
            let timings = match alignment {
                Some(a) => read_alignment(a)?,
                None => {
                    let hyp = read_hyp_transcript(hyp.expect("clap requires hyp"))?;
                    align_with(&m, &hyp, variant, cfg.c)?
                }
            };
            let reference = reference.map(read_ref_transcript).transpose()?;
            let mut gaps = extract_gaps(&timings, m.duration(), cfg.min_gap);
            for g in &mut gaps {
                if let Some(r) = &reference {
                    g.label = Some(label_gap(g, r, cfg.overlap_threshold));
                }
                let (label, score) = baseline_classify(g, &m, cfg.baseline_threshold)?;
                g.predicted = Some(label);
                g.score = Some(score);
            }
            emit(&to_json(&gaps), output.as_deref())
        }
        Command::Score {
            reference,
            alignment,
            output,
        } => {
            let reference = read_ref_transcript(reference)?;
            let aligned = read_alignment(alignment)?;
            emit(&to_json(&score_alignment(&reference, &aligned, &cfg)?), output.as_deref())
        }
        Command::Wer { reference, hyp, output } => {
            let reference = read_ref_transcript(reference)?;
            let hyp = read_hyp_transcript(hyp)?;
            let ref_text: Vec<&str> = reference.iter().map(|w| w.text.as_str()).collect();
            let pairs = levenshtein_align(&ref_text, hyp.words());
            let flags: Vec<bool> = reference.iter().map(|w| w.disfluent).collect();
            let report = WerOutput {
                wer: EditCounts::from_pairs(&pairs).into(),
                categorization: categorize_words(&pairs, &flags)?,
            };
            emit(&to_json(&report), output.as_deref())
        }
        Command::Segment {
            reference,
            duration,
            output,
        } => {
            let words = read_ref_transcript(reference)?;
            let total = duration.unwrap_or_else(|| words.last().map_or(0.0, |w| w.end));
            let segments: Vec<SegmentOutput> = plan_segments(&words, total, &cfg.segment)
                .into_iter()
                .map(|s| SegmentOutput {
                    start: s.start,
                    end: s.end,
                    first_word: s.first_word,
                    last_word: s.last_word,
                    indivisible: s.duration() > cfg.segment.max_segment
                        && is_indivisible(&words, &s, &cfg.segment),
                })
                .collect();
            emit(&to_json(&segments), output.as_deref())
        }
        Command::Classify {
            manifest,
            predictions,
            output,
        } => {
            let (corpus, mut failures) = load_manifest(&manifest)?;
            let preds = predictions_for(&corpus, &cfg, predictions.as_deref())?;
            let mut report = classify_corpus(&corpus, &cfg, preds.as_ref())?;
            failures.append(&mut report.failures);
            report.failures = failures;
            emit(&to_json(&report), output.as_deref())
        }
        Command::Dataset { manifest, out_dir } => {
            let (corpus, failures) = load_manifest(&manifest)?;
            let split = build_gap_dataset(&corpus, &cfg)?;
            create_dir(&out_dir)?;
            for (name, rows) in [("train.tsv", &split.train), ("test.tsv", &split.test)] {
                let p = out_dir.join(name);
                fs::write(&p, format_dataset(rows)).map_err(|e| io_err(&p, e))?;
            }
            let all: Vec<Failure> = failures.into_iter().chain(split.failures).collect();
            let summary = DatasetSummary {
                train: split.train.len(),
                test: split.test.len(),
                failures: all,
            };
            emit(&to_json(&summary), None)
        }
        Command::Evaluate {
            manifest,
            predictions,
            output,
            series,
        } => {
            let (corpus, failures) = load_manifest(&manifest)?;
            let preds = predictions_for(&corpus, &cfg, predictions.as_deref())?;
            let report = evaluate(&corpus, &cfg, preds.as_ref(), failures)?;
            if let Some(p) = series {
                let csv = sweep_csv(&corpus, &cfg)?;
                fs::write(&p, csv).map_err(|e| io_err(&p, e))?;
            }
            emit(&to_json(&report), output.as_deref())
        }
        Command::Synth { out_dir, count } => {
            let manifest = write_corpus(&synthetic_corpus(count, cfg.seed), &out_dir)?;
            println!("{}", manifest.display());
            Ok(())
        }
    }
}

fn align_with(m: &gapalign_core::EmissionMatrix, hyp: &HypTranscript, method: Method, c: f64) -> Result<Vec<WordTiming>> {
    match method {
        Method::Standard => align_ctc(m, hyp, Variant::Standard),
        Method::Modified => align_ctc(m, hyp, Variant::modified(c)?),
        Method::Attention => Err(Error::Invalid {
            field: "variant",
            location: "gaps".into(),
            reason: "attention alignments must be passed with --alignment".into(),
        }),
    }
}

fn align_single(
    emissions: Option<&Path>,
    hyp: Option<&Path>,
    attention: Option<&Path>,
    method: Method,
    c: f64,
) -> Result<Vec<WordTiming>> {
    if method == Method::Attention {
        let a = attention.ok_or_else(|| Error::Invalid {
            field: "attention",
            location: "align".into(),
            reason: "the attention aligner needs --attention".into(),
        })?;
        return Ok(align_dtw_attention(&read_attention(a)?));
    }
    let m = read_emissions(emissions.expect("clap requires emissions"))?;
    let hyp = read_hyp_transcript(hyp.expect("clap requires hyp"))?;
    align_with(&m, &hyp, method, c)
}

#[derive(Serialize)]
struct BatchSummary {
    aligned: Vec<String>,
    failures: Vec<Failure>,
}

fn align_batch(manifest: &Path, out_dir: &Path, method: Method, cfg: &PipelineConfig) -> Result<()> {
    let entries = read_manifest(manifest)?;
    create_dir(out_dir)?;
    let results: Vec<Result<()>> = entries
        .par_iter()
        .map(|e| {
            let u = Utterance::load(e)?;
            let timings = u.align(method, cfg.c)?;
            write_alignment(&timings, out_dir.join(format!("{}.align.json", e.id)))
        })
        .collect();
    let mut summary = BatchSummary {
        aligned: Vec::new(),
        failures: Vec::new(),
    };
    for (e, r) in entries.iter().zip(results) {
        match r {
            Ok(()) => summary.aligned.push(e.id.clone()),
            Err(err) => {
                log::warn!("{}: {err}", e.id);
                summary.failures.push(Failure::new(&e.id, Some(method), &err));
            }
        }
    }
    emit(&to_json(&summary), None)
}

fn load_manifest(path: &Path) -> Result<(Vec<Utterance>, Vec<Failure>)> {
    let entries = read_manifest(path)?;
    let (corpus, failures) = load_corpus(&entries);
    for f in &failures {
        log::warn!("{}: {}", f.utterance, f.message);
    }
    Ok((corpus, failures))
}

/// External predictions when the classifier is external, checked against the corpus gap ids.
fn predictions_for(corpus: &[Utterance], cfg: &PipelineConfig, path: Option<&Path>) -> Result<Option<PredictionSet>> {
    match (cfg.classifier, path) {
        (ClassifierKind::Baseline, None) => Ok(None),
        (ClassifierKind::Baseline, Some(_)) | (ClassifierKind::External, Some(_)) => {
            let path = path.expect("matched Some");
            let ids: Vec<String> = corpus
                .iter()
                .filter_map(|u| utterance_gaps(u, cfg).ok())
                .flatten()
                .map(|g| g.id)
                .collect();
            load_predictions(path, ids.iter().map(String::as_str)).map(Some)
        }
        (ClassifierKind::External, None) => Err(Error::Invalid {
            field: "predictions",
            location: "classifier".into(),
            reason: "the external classifier needs --predictions".into(),
        }),
    }
}

#[derive(Serialize)]
struct WerOutput {
    wer: WerReport,
    categorization: gapalign_core::text_align::CategorizationCounts,
}

#[derive(Serialize)]
struct SegmentOutput {
    start: f64,
    end: f64,
    first_word: usize,
    last_word: usize,
    indivisible: bool,
}

#[derive(Serialize)]
struct DatasetSummary {
    train: usize,
    test: usize,
    failures: Vec<Failure>,
}

fn score_alignment(
    reference: &[gapalign_core::RefWord],
    aligned: &[WordTiming],
    cfg: &PipelineConfig,
) -> Result<Vec<gapalign_core::metrics::ScoreSummary>> {
    let ref_text: Vec<&str> = reference.iter().map(|w| w.text.as_str()).collect();
    // Hypothesis word i is the i-th aligned word; missing indices stay unmatched.
    let hyp_len = aligned.iter().map(|w| w.word_index + 1).max().unwrap_or(0);
    let mut hyp_text = vec![String::new(); hyp_len];
    for w in aligned {
        hyp_text[w.word_index] = w.text.clone();
    }
    let pairs = levenshtein_align(&ref_text, &hyp_text);
    let ref_timings: Vec<WordTiming> = reference
        .iter()
        .enumerate()
        .map(|(i, w)| WordTiming::new(i, w.text.clone(), w.start, w.end))
        .collect();
    let mut out = Vec::new();
    for scope in [Scope::AllWords, Scope::AroundUntranscribed] {
        match summarize(&pairs, &ref_timings, aligned, scope, cfg.matches_only) {
            Ok(s) => out.push(s),
            Err(Error::NoPairs) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

