use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the alignment toolkit can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("size mismatch: header declares {expected} values, payload holds {actual} bytes")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("frame {frame}: probabilities sum to {sum}, not 1")]
    NonProbabilistic { frame: usize, sum: f64 },

    #[error("invalid {field} at {location}: {reason}")]
    Invalid {
        field: &'static str,
        location: String,
        reason: String,
    },

    #[error("transcript has no characters in the vocabulary")]
    EmptyAfterNormalization,

    #[error("{frames} frames cannot hold {tokens} tokens")]
    PathInfeasible { frames: usize, tokens: usize },

    #[error("trellis corner is unreachable")]
    NoPath,

    #[error("instance too large for exhaustive search ({frames} frames, {tokens} tokens)")]
    InstanceTooLarge { frames: usize, tokens: usize },

    #[error("reference word has zero length")]
    ZeroLengthReference,

    #[error("no scorable word pairs")]
    NoPairs,

    #[error("reference transcript is empty")]
    EmptyReference,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("gap [{start}, {end}) covers no whole frame")]
    EmptyFrameRange { start: f64, end: f64 },

    #[error("no prediction for gap {0}")]
    MissingGapId(String),

    #[error("prediction for unknown gap {0}")]
    UnknownGapId(String),

    #[error("prediction and label sets differ at {0}")]
    SetMismatch(String),

    #[error("nothing to evaluate")]
    EmptyEvaluation,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(
        field: &'static str,
        location: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Error::Invalid {
            field,
            location: location.into(),
            reason: reason.into(),
        }
    }

    /// Stable snake_case identifier used in machine-readable error records.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::BadMagic { .. } => "bad_magic",
            Error::MalformedHeader(_) => "malformed_header",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::NonProbabilistic { .. } => "non_probabilistic",
            Error::Invalid { .. } => "invalid",
            Error::EmptyAfterNormalization => "empty_after_normalization",
            Error::PathInfeasible { .. } => "path_infeasible",
            Error::NoPath => "no_path",
            Error::InstanceTooLarge { .. } => "instance_too_large",
            Error::ZeroLengthReference => "zero_length_reference",
            Error::NoPairs => "no_pairs",
            Error::EmptyReference => "empty_reference",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::EmptyFrameRange { .. } => "empty_frame_range",
            Error::MissingGapId(_) => "missing_gap_id",
            Error::UnknownGapId(_) => "unknown_gap_id",
            Error::SetMismatch(_) => "set_mismatch",
            Error::EmptyEvaluation => "empty_evaluation",
        }
    }

    /// Process exit status: 1 for I/O, 2 for inputs that admit no alignment, 3 for
    /// everything that failed validation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 1,
            Error::PathInfeasible { .. } | Error::NoPath | Error::EmptyAfterNormalization => 2,
            _ => 3,
        }
    }
}
