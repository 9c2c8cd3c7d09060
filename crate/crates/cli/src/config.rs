//! Pipeline configuration: defaults, then a TOML file, then explicit flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gapalign_core::pipeline::{ClassifierKind, Method, PipelineConfig};
use gapalign_core::{Error, Result};

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file with pipeline settings; explicit flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Log-probability floor for staying on a word separator.
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "LOGPROB")]
    pub c: Option<f64>,
    /// Shortest gap between aligned words worth classifying, in seconds.
    #[arg(long, global = true, value_name = "SECONDS")]
    pub min_gap: Option<f64>,
    /// Fraction of a reference word a gap must cover for the word to count as inside it.
    #[arg(long, global = true)]
    pub overlap_threshold: Option<f64>,
    #[arg(long, global = true, value_parser = parse_classifier)]
    pub classifier: Option<ClassifierKind>,
    #[arg(long, global = true)]
    pub baseline_threshold: Option<f64>,
    #[arg(long, global = true, value_name = "SECONDS")]
    pub silence_split: Option<f64>,
    #[arg(long, global = true, value_name = "SECONDS")]
    pub max_segment: Option<f64>,
    #[arg(long, global = true, value_name = "SECONDS")]
    pub min_edge_distance: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Share of gaps going to the training split.
    #[arg(long, global = true)]
    pub split_fraction: Option<f64>,
    /// Score only exact word matches, not substitutions.
    #[arg(long, global = true)]
    pub matches_only: bool,
    /// Comma-separated aligners to compare.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Option<Vec<Method>>,
    /// Aligner whose gaps are classified.
    #[arg(long, global = true, value_parser = parse_method)]
    pub gap_method: Option<Method>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    s.parse()
}

pub fn load_file(path: &Path) -> Result<PipelineConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Invalid {
        field: "config",
        location: path.display().to_string(),
        reason: e.message().to_string(),
    })
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_file(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($field:ident).+ <- $flag:expr) => {
                if let Some(v) = $flag.clone() {
                    cfg.$($field).+ = v;
                }
            };
        }
        set!(c <- self.c);
        set!(min_gap <- self.min_gap);
        set!(overlap_threshold <- self.overlap_threshold);
        set!(classifier <- self.classifier);
        set!(baseline_threshold <- self.baseline_threshold);
        set!(segment.silence_split <- self.silence_split);
        set!(segment.max_segment <- self.max_segment);
        set!(segment.min_edge_distance <- self.min_edge_distance);
        set!(seed <- self.seed);
        set!(split_fraction <- self.split_fraction);
        set!(methods <- self.methods);
        set!(gap_method <- self.gap_method);
        if self.matches_only {
            cfg.matches_only = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
