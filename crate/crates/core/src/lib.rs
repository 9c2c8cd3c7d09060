//! Forced alignment of ASR transcripts that tolerates speech missing from the transcript, and
//! the tooling around it: gap detection and classification, alignment scoring, word error
//! rates and long-recording segmentation.

pub mod align;
pub mod classify;
pub mod error;
pub mod gaps;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod segment;
pub mod synthetic;
pub mod text_align;

pub use align::{align_ctc, align_dtw_attention, Variant, WordTiming};
pub use error::{Error, Result};
pub use gaps::{extract_gaps, label_gap, Gap, GapLabel};
pub use io::{AttentionMatrix, EmissionMatrix, HypTranscript, RefWord};
pub use pipeline::{evaluate, EvaluationReport, Method, PipelineConfig};
