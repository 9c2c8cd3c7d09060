//! Deterministic synthetic corpora: character-level CTC emissions with words the hypothesis
//! leaves out. Used for fixtures, demos and end-to-end checks.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::{AttentionMatrix, EmissionMatrix, HypTranscript, RefWord};

pub const BLANK: usize = 0;
pub const SEPARATOR: usize = 1;
pub const FRAME_DURATION: f64 = 0.02;

/// Blank probability on silent frames.
pub const SILENCE_BLANK: f64 = 0.99;
/// Blank probability on frames carrying a character.
pub const SPEECH_BLANK: f64 = 0.01;
/// Probability of the dominant character on speech frames.
pub const SPEECH_PEAK: f64 = 0.98;
/// Blank and character probability on the frames following a character spike.
pub const TAIL_BLANK: f64 = 0.9;
pub const TAIL_PEAK: f64 = 0.09;

/// Transcribed words avoid the letters used by fillers.
const WORDS: &[&str] = &[
    "i", "was", "good", "at", "art", "tea", "lots", "of", "data", "rest", "sort", "word", "go", "do",
    "if", "sit", "it", "is", "so", "dog", "cat", "big", "red", "toy", "lake", "road", "kept",
    "view", "zero", "pay",
];
const FILLERS: &[&str] = &["uh", "um", "hm", "mhm", "uhm", "hmm"];

/// `<blank>`, `|`, `'`, then `a` to `z`.
pub fn character_vocab() -> Vec<String> {
    let mut v = vec!["<blank>".to_string(), "|".to_string(), "'".to_string()];
    v.extend(('a'..='z').map(String::from));
    v
}

fn token_of(c: char) -> usize {
    match c {
        '\'' => 2,
        'a'..='z' => 3 + (c as usize - 'a' as usize),
        _ => panic!("no token for {c:?}"),
    }
}

/// Accumulates emission rows.
#[derive(Debug, Clone)]
pub struct FrameWriter {
    vocab_size: usize,
    values: Vec<f32>,
}

impl Default for FrameWriter {
    fn default() -> Self {
        Self::new(character_vocab().len())
    }
}

impl FrameWriter {
    pub fn new(vocab_size: usize) -> Self {
        Self {
            vocab_size,
            values: Vec::new(),
        }
    }

    pub fn frames(&self) -> usize {
        self.values.len() / self.vocab_size
    }

    /// One frame: `blank_p` on the blank, `peak_p` on `token`, the remainder spread evenly.
    pub fn push(&mut self, token: usize, peak_p: f64, blank_p: f64) {
        let v = self.vocab_size;
        let mut row = vec![0.0f64; v];
        if token == BLANK {
            let rest = (1.0 - blank_p) / (v - 1) as f64;
            row.fill(rest);
            row[BLANK] = blank_p;
        } else {
            let rest = (1.0 - blank_p - peak_p) / (v - 2) as f64;
            row.fill(rest);
            row[BLANK] = blank_p;
            row[token] = peak_p;
        }
        self.values.extend(row.iter().map(|p| p.ln() as f32));
    }

    pub fn silence(&mut self, n: usize) {
        for _ in 0..n {
            self.push(BLANK, 0.0, SILENCE_BLANK);
        }
    }

    pub fn speech(&mut self, token: usize, n: usize) {
        for _ in 0..n {
            self.push(token, SPEECH_PEAK, SPEECH_BLANK);
        }
    }

    /// Spells `word` with `frames_per_char` frames per character: a spike, then mostly blank.
    /// Returns its frame range.
    pub fn word(&mut self, word: &str, frames_per_char: usize) -> Range<usize> {
        let start = self.frames();
        for c in word.chars() {
            self.speech(token_of(c), 1);
            for _ in 1..frames_per_char {
                self.push(token_of(c), TAIL_PEAK, TAIL_BLANK);
            }
        }
        start..self.frames()
    }

    /// Like [`FrameWriter::word`] but with every frame a confident character, the way
    /// hesitations look to a model that was never trained to transcribe them.
    pub fn mumble(&mut self, word: &str, frames_per_char: usize) -> Range<usize> {
        let start = self.frames();
        for c in word.chars() {
            self.speech(token_of(c), frames_per_char);
        }
        start..self.frames()
    }

    pub fn finish(self, frame_duration: f64) -> EmissionMatrix {
        EmissionMatrix::new(character_vocab(), BLANK, SEPARATOR, frame_duration, self.values)
            .expect("synthetic rows are distributions")
    }
}

/// 120 frames: "good", then speech the hypothesis omits on frames 50 through 75, then "day".
/// The only strong separator peak follows the omitted speech.
pub struct PlantedFixture {
    pub emissions: EmissionMatrix,
    pub hypothesis: HypTranscript,
    pub planted: Range<usize>,
}

pub fn planted_disfluency_fixture() -> PlantedFixture {
    let mut w = FrameWriter::default();
    w.silence(10);
    w.word("good", 4);
    w.silence(50 - w.frames());
    let planted = w.frames()..76;
    for i in 0..planted.len() {
        w.speech(token_of(if i % 4 < 2 { 'x' } else { 'q' }), 1);
    }
    w.speech(SEPARATOR, 1);
    w.silence(3);
    w.word("day", 4);
    w.silence(120 - w.frames());
    PlantedFixture {
        emissions: w.finish(FRAME_DURATION),
        hypothesis: HypTranscript::parse("good day").unwrap(),
        planted,
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticUtterance {
    pub id: String,
    pub emissions: EmissionMatrix,
    pub hypothesis: HypTranscript,
    pub reference: Vec<RefWord>,
    pub attention: AttentionMatrix,
    /// Reference indices of words missing from the hypothesis.
    pub planted: Vec<usize>,
}

/// Builds `n` utterances of 6 to 12 transcribed words with one or two fillers planted between
/// transcribed words. Fillers are spoken slowly (8 to 10 frames per character) and marked
/// disfluent; some utterances also contain long empty pauses.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<SyntheticUtterance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| utterance(format!("utt{i:03}"), &mut rng)).collect()
}

fn utterance(id: String, rng: &mut ChaCha8Rng) -> SyntheticUtterance {
    let n_words = rng.random_range(6..=12);
    let said: Vec<&str> = (0..n_words).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
    // Slots between transcribed words, never before the first or after the last.
    let mut slots: Vec<usize> = (1..n_words).collect();
    let n_planted = rng.random_range(1..=2);
    let mut chosen = Vec::new();
    for _ in 0..n_planted {
        let k = rng.random_range(0..slots.len());
        chosen.push(slots.swap_remove(k));
    }
    chosen.sort_unstable();

    let mut sequence: Vec<(&str, bool)> = Vec::new();
    for (k, w) in said.iter().enumerate() {
        if chosen.contains(&k) {
            sequence.push((FILLERS[rng.random_range(0..FILLERS.len())], true));
        }
        sequence.push((w, false));
    }

    let mut fw = FrameWriter::default();
    fw.silence(8);
    let mut reference = Vec::new();
    let mut planted = Vec::new();
    let mut hyp_frames: Vec<Range<usize>> = Vec::new();
    for (i, &(word, is_planted)) in sequence.iter().enumerate() {
        if i > 0 {
            // The acoustic model hears no word boundary before a hesitation.
            if !is_planted {
                fw.speech(SEPARATOR, 1);
            }
            let next_planted = is_planted || sequence[i - 1].1;
            let pause = if !next_planted && rng.random_bool(0.15) {
                rng.random_range(20..=30)
            } else {
                rng.random_range(0..=3)
            };
            fw.silence(pause);
        }
        let per_char = if is_planted {
            rng.random_range(8..=10)
        } else {
            rng.random_range(2..=3)
        };
        let span = if is_planted {
            fw.mumble(word, per_char)
        } else {
            fw.word(word, per_char)
        };
        let disfluent = is_planted || rng.random_bool(0.1);
        if is_planted {
            planted.push(reference.len());
        } else {
            hyp_frames.push(span.clone());
        }
        reference.push(RefWord::new(
            word,
            span.start as f64 * FRAME_DURATION,
            span.end as f64 * FRAME_DURATION,
            disfluent,
        ));
    }
    fw.silence(8);
    let num_frames = fw.frames();

    let mut weights = vec![0.0f32; said.len() * num_frames];
    for (tok, span) in hyp_frames.iter().enumerate() {
        for f in span.clone() {
            weights[tok * num_frames + f] = 1.0;
        }
    }
    let attention = AttentionMatrix::new(
        said.len(),
        num_frames,
        FRAME_DURATION,
        (0..said.len()).collect(),
        said.iter().map(|s| s.to_string()).collect(),
        weights,
    )
    .expect("synthetic attention is valid");

    SyntheticUtterance {
        id,
        emissions: fw.finish(FRAME_DURATION),
        hypothesis: HypTranscript::new(&said).unwrap(),
        reference,
        attention,
        planted,
    }
}
