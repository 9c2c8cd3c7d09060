//! On-disk formats.

mod attention;
mod emissions;
mod framing;
mod report;
mod transcript;

pub use attention::{read_attention, write_attention, AttentionMatrix, ATTENTION_MAGIC};
pub use emissions::{read_emissions, write_emissions, EmissionMatrix, EMISSION_MAGIC, ROW_SUM_TOLERANCE};
pub use report::{alignment_json, read_alignment, read_json, round_ms, to_json, write_alignment, write_report};
pub use transcript::{
    format_ref_transcript, parse_ref_transcript, read_hyp_transcript, read_ref_transcript,
    validate_ref_words, write_hyp_transcript, write_ref_transcript, HypTranscript, RefWord, WORD_SEPARATOR,
};
