//! Splitting long recordings into short segments at silences between words.

use serde::{Deserialize, Serialize};

use crate::io::RefWord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentConfig {
    /// Every silence longer than this is a cut.
    pub silence_split: f64,
    /// Segments longer than this are cut again at their widest silence.
    pub max_segment: f64,
    /// A second-stage cut must sit at least this far from both segment edges.
    pub min_edge_distance: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            silence_split: 5.0,
            max_segment: 30.0,
            min_edge_distance: 10.0,
        }
    }
}

/// A stretch of audio holding words `first_word..=last_word`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub first_word: usize,
    pub last_word: usize,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

fn cut_point(words: &[RefWord], after: usize) -> f64 {
    (words[after].end + words[after + 1].start) / 2.0
}

/// Cuts at the midpoint of every silence longer than `silence_split`, then repeatedly splits
/// any segment longer than `max_segment` at the midpoint of its widest silence whose midpoint
/// is at least `min_edge_distance` from both edges. Segments without such a silence are kept
/// whole. Segments tile `[0, max(total_duration, last word end)]`.
pub fn plan_segments(words: &[RefWord], total_duration: f64, cfg: &SegmentConfig) -> Vec<Segment> {
    let Some(last) = words.last() else {
        return Vec::new();
    };
    let end = total_duration.max(last.end);

    let mut stage1 = Vec::new();
    let (mut start, mut first) = (0.0, 0);
    for i in 0..words.len() - 1 {
        if words[i + 1].start - words[i].end > cfg.silence_split {
            let cut = cut_point(words, i);
            stage1.push(Segment {
                start,
                end: cut,
                first_word: first,
                last_word: i,
            });
            start = cut;
            first = i + 1;
        }
    }
    stage1.push(Segment {
        start,
        end,
        first_word: first,
        last_word: words.len() - 1,
    });

    let mut out = Vec::with_capacity(stage1.len());
    for seg in stage1 {
        split_long(words, seg, cfg, &mut out);
    }
    out
}

fn split_long(words: &[RefWord], seg: Segment, cfg: &SegmentConfig, out: &mut Vec<Segment>) {
    if seg.duration() <= cfg.max_segment {
        out.push(seg);
        return;
    }
    let mut best: Option<(usize, f64)> = None;
    for i in seg.first_word..seg.last_word {
        let cut = cut_point(words, i);
        if cut - seg.start < cfg.min_edge_distance || seg.end - cut < cfg.min_edge_distance {
            continue;
        }
        let width = words[i + 1].start - words[i].end;
        if best.is_none_or(|(_, w)| width > w) {
            best = Some((i, width));
        }
    }
    let Some((i, _)) = best else {
        out.push(seg);
        return;
    };
    let cut = cut_point(words, i);
    split_long(
        words,
        Segment {
            end: cut,
            last_word: i,
            ..seg
        },
        cfg,
        out,
    );
    split_long(
        words,
        Segment {
            start: cut,
            first_word: i + 1,
            ..seg
        },
        cfg,
        out,
    );
}

/// True when no cut point inside `seg` keeps `min_edge_distance` from both edges.
pub fn is_indivisible(words: &[RefWord], seg: &Segment, cfg: &SegmentConfig) -> bool {
    (seg.first_word..seg.last_word).all(|i| {
        let cut = cut_point(words, i);
        cut - seg.start < cfg.min_edge_distance || seg.end - cut < cfg.min_edge_distance
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: f64, e: f64) -> RefWord {
        RefWord::new("w", s, e, false)
    }

    #[test]
    fn short_recording_is_one_segment() {
        let words: Vec<_> = (0..20).map(|i| w(i as f64, i as f64 + 0.8)).collect();
        let segs = plan_segments(&words, 20.0, &SegmentConfig::default());
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].first_word, segs[0].last_word), (0, 19));
    }

    #[test]
    fn long_silence_splits() {
        let words = vec![w(0.0, 1.0), w(1.5, 2.0), w(8.0, 9.0), w(9.5, 10.0)];
        let segs = plan_segments(&words, 10.0, &SegmentConfig::default());
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].end, 5.0);
        assert_eq!((segs[1].start, segs[1].first_word), (5.0, 2));
    }

    #[test]
    fn largest_eligible_gap_first() {
        // Half-second words with 0.5 s pauses, except a 1 s silence centred on 25 s and a
        // 2 s silence centred on 45 s.
        let mut words = Vec::new();
        let mut t = 0.0;
        while t < 69.9 {
            words.push(w(t, t + 0.5));
            t += if (t - 24.0f64).abs() < 1e-9 {
                1.5
            } else if (t - 43.5f64).abs() < 1e-9 {
                2.5
            } else {
                1.0
            };
        }
        let segs = plan_segments(&words, 70.0, &SegmentConfig::default());
        let cuts: Vec<f64> = segs.iter().skip(1).map(|s| s.start).collect();
        assert_eq!(cuts, vec![25.0, 45.0]);
    }

    #[test]
    fn indivisible_segment_kept() {
        // One 40 s word run with a single usable silence 2 s from the start.
        let words = vec![w(0.0, 1.0), w(3.0, 40.0)];
        let cfg = SegmentConfig::default();
        let segs = plan_segments(&words, 40.0, &cfg);
        assert_eq!(segs.len(), 1);
        assert!(is_indivisible(&words, &segs[0], &cfg));
    }

    #[test]
    fn empty_input() {
        assert!(plan_segments(&[], 12.0, &SegmentConfig::default()).is_empty());
    }
}
