//! Acceptance criteria A1 to A9. Prints one PASS/FAIL line per criterion and exits non-zero
//! when any fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use gapalign_core::align::{
    backtrack, brute_force_best_path, build_trellis, build_trellis_modified, build_trellis_standard, path_score,
    tokenize, Variant,
};
use gapalign_core::classify::{eval_classifier, ClassifierMetrics};
use gapalign_core::gaps::{extract_gaps, label_gap, Gap, GapLabel};
use gapalign_core::metrics::{combined_score, length_score, position_score};
use gapalign_core::pipeline::{evaluate, PipelineConfig, Utterance};
use gapalign_core::segment::{is_indivisible, plan_segments, SegmentConfig};
use gapalign_core::synthetic::{planted_disfluency_fixture, synthetic_corpus};
use gapalign_core::text_align::{levenshtein_align, EditCounts};
use gapalign_core::{align_ctc, EmissionMatrix, HypTranscript, RefWord, WordTiming};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        {
            let ok: bool = $cond;
            if !ok {
                return Err(format!($($fmt)+));
            }
        }
    };
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("A1", "trellis matches exhaustive search", a1),
        ("A2", "very negative floor degenerates to standard", a2),
        ("A3", "alignment metric exactness and invariance", a3),
        ("A4", "planted untranscribed speech opens a gap", a4),
        ("A5", "overlap threshold flips exactly past one half", a5),
        ("A6", "levenshtein matches recursive oracle", a6),
        ("A7", "segmenter invariants", a7),
        ("A8", "classifier metrics over the confusion grid", a8),
        ("A9", "end-to-end evaluation on a synthetic corpus", a9),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("{id} PASS {name} ({ms:.0} ms): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL {name} ({ms:.0} ms): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

const LETTERS: &[char] = &['a', 'b', 'c', 'd'];

fn random_matrix(rng: &mut ChaCha8Rng, t: usize, v: usize) -> EmissionMatrix {
    let mut vocab = vec!["<b>".to_string(), "|".to_string()];
    vocab.extend(LETTERS[..v - 2].iter().map(|c| c.to_string()));
    let mut values = Vec::with_capacity(t * v);
    for _ in 0..t {
        let logits: Vec<f64> = (0..v).map(|_| rng.random_range(-5.0..5.0)).collect();
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z = logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln() + max;
        values.extend(logits.iter().map(|l| (l - z) as f32));
    }
    EmissionMatrix::new(vocab, 0, 1, 0.02, values).unwrap()
}

/// A hypothesis whose token sequence (leading separator included) has at most `max_tokens`.
fn random_hyp(rng: &mut ChaCha8Rng, v: usize, max_tokens: usize) -> HypTranscript {
    let mut words: Vec<String> = vec![String::new()];
    let mut tokens = 2;
    words[0].push(LETTERS[rng.random_range(0..v - 2)]);
    while tokens < max_tokens && rng.random_bool(0.6) {
        let c = LETTERS[rng.random_range(0..v - 2)];
        if tokens + 2 <= max_tokens && rng.random_bool(0.4) {
            words.push(c.to_string());
            tokens += 2;
        } else {
            words.last_mut().unwrap().push(c);
            tokens += 1;
        }
    }
    HypTranscript::new(&words).unwrap()
}

fn a1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let variants = [
        Variant::Standard,
        Variant::Modified { c: 0.0 },
        Variant::Modified { c: -0.01 },
        Variant::Modified { c: -1.0 },
        Variant::Modified { c: -1e9 },
    ];
    let (mut checked, mut infeasible) = (0, 0);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let v = rng.random_range(3..=6);
        let t = rng.random_range(1..=8);
        let m = random_matrix(&mut rng, t, v);
        let s = tokenize(&random_hyp(&mut rng, v, 5), &m).map_err(|e| e.to_string())?;
        ensure!(s.len() <= 5, "case {case}: {} tokens", s.len());
        for variant in variants {
            match (brute_force_best_path(&m, &s, variant), build_trellis(&m, &s, variant)) {
                (Ok((_, best)), Ok(tr)) => {
                    let diff = (tr.corner() - best).abs();
                    worst = worst.max(diff);
                    ensure!(diff <= 1e-9, "case {case} {variant:?}: corner {} oracle {best}", tr.corner());
                    let p = backtrack(&tr, &m, &s).map_err(|e| e.to_string())?;
                    let rescored = path_score(&m, &s, variant, p.token_at_frame());
                    ensure!(
                        rescored == tr.corner() && p.score() == tr.corner(),
                        "case {case} {variant:?}: path {rescored} corner {}",
                        tr.corner()
                    );
                    checked += 1;
                }
                (Err(a), Err(b)) if a.code() == "path_infeasible" && b.code() == "path_infeasible" => {
                    infeasible += 1
                }
                (a, b) => return Err(format!("case {case} {variant:?}: oracle {a:?} trellis {:?}", b.err())),
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!(
        "{checked} feasible and {infeasible} infeasible checks, max |corner - oracle| = {worst:.1e}"
    ))
}

fn a2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let v = rng.random_range(3..=6);
        let t = rng.random_range(8..=60);
        let m = random_matrix(&mut rng, t, v);
        let s = tokenize(&random_hyp(&mut rng, v, 8), &m).map_err(|e| e.to_string())?;
        let a = build_trellis_standard(&m, &s).map_err(|e| e.to_string())?;
        let b = build_trellis_modified(&m, &s, -1e9).map_err(|e| e.to_string())?;
        let same = a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure!(same, "case {case}: trellis differs");
        let pa = backtrack(&a, &m, &s).map_err(|e| e.to_string())?;
        let pb = backtrack(&b, &m, &s).map_err(|e| e.to_string())?;
        ensure!(pa.token_at_frame() == pb.token_at_frame(), "case {case}: path differs");
        ensure!(pa.score().to_bits() == pb.score().to_bits(), "case {case}: score differs");
    }
    Ok("100 instances bit-identical".into())
}

fn wt(s: f64, e: f64) -> WordTiming {
    WordTiming::new(0, "w", s, e)
}

fn a3() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    // Identical intervals; same centre with double the length; same length shifted by
    // five half-lengths.
    let r = wt(1.0, 2.0);
    let e = |x: gapalign_core::Result<f64>| x.map_err(|e| e.to_string());
    ensure!(close(e(combined_score(&r, &wt(1.0, 2.0)))?, 1.0), "identical");
    ensure!(close(e(length_score(&r, &wt(0.5, 2.5)))?, 0.5), "length example");
    ensure!(close(e(position_score(&r, &wt(0.5, 2.5)))?, 1.0), "length example position");
    ensure!(close(e(position_score(&r, &wt(6.0, 7.0)))?, 1.0 / 11.0), "position example");
    ensure!(close(e(combined_score(&r, &wt(0.5, 2.5)))?, 0.5), "combined example");
    ensure!(e(position_score(&wt(1.0, 1.0), &r)).is_err(), "zero-length reference must fail");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s1 = rng.random_range(0.0..10.0);
        let r = wt(s1, s1 + rng.random_range(0.05..2.0));
        let s2 = rng.random_range(0.0..10.0);
        let h = wt(s2, s2 + rng.random_range(0.0..2.0));
        let base = [
            e(position_score(&r, &h))?,
            e(length_score(&r, &h))?,
            e(combined_score(&r, &h))?,
        ];
        for v in base {
            ensure!(v > 0.0 && v <= 1.0, "score {v} out of (0, 1]");
        }
        let k = rng.random_range(0.1..10.0);
        let d = rng.random_range(-50.0..50.0);
        for (f, name) in [
            (Box::new(move |x: f64| x * k) as Box<dyn Fn(f64) -> f64>, "scale"),
            (Box::new(move |x: f64| x + d), "translate"),
        ] {
            let (r2, h2) = (wt(f(r.start), f(r.end)), wt(f(h.start), f(h.end)));
            let moved = [
                e(position_score(&r2, &h2))?,
                e(length_score(&r2, &h2))?,
                e(combined_score(&r2, &h2))?,
            ];
            for (a, b) in base.iter().zip(moved) {
                worst = worst.max((a - b).abs());
                ensure!((a - b).abs() < 1e-9, "{name} invariance: {a} vs {b}");
            }
        }
    }
    Ok(format!("hand examples exact, 1000 pairs invariant (max drift {worst:.1e})"))
}

fn a4() -> Outcome {
    let start = Instant::now();
    let f = planted_disfluency_fixture();
    let fd = f.emissions.frame_duration();
    let (p0, p1) = (f.planted.start, f.planted.end);
    ensure!((p0, p1) == (50, 76) && f.emissions.num_frames() == 120, "fixture layout changed");
    // Frames of the planted region inside a gap of at least 0.3 s.
    let covered = |timings: &[WordTiming]| -> usize {
        let gaps = extract_gaps(timings, f.emissions.duration(), 0.3);
        (p0..p1)
            .filter(|&t| {
                let mid = (t as f64 + 0.5) * fd;
                gaps.iter().any(|g| g.start <= mid && mid < g.end)
            })
            .count()
    };
    let modified = Variant::modified(-0.01).map_err(|e| e.to_string())?;
    let mt = align_ctc(&f.emissions, &f.hypothesis, modified).map_err(|e| e.to_string())?;
    let st = align_ctc(&f.emissions, &f.hypothesis, Variant::Standard).map_err(|e| e.to_string())?;
    let (mc, sc) = (covered(&mt), covered(&st));
    let n = p1 - p0;
    ensure!(2 * mc > n, "modified covers {mc}/{n} planted frames: {mt:?}");
    ensure!(2 * sc <= n, "standard covers {sc}/{n} planted frames: {st:?}");

    // Each path is optimal under its own scoring and strictly better than the other's.
    let s = tokenize(&f.hypothesis, &f.emissions).map_err(|e| e.to_string())?;
    let paths = |v: Variant| {
        let tr = build_trellis(&f.emissions, &s, v).unwrap();
        backtrack(&tr, &f.emissions, &s).unwrap()
    };
    let (pm, ps) = (paths(modified), paths(Variant::Standard));
    let sep_frames = |p: &gapalign_core::align::FramePath| {
        (p0..p1).filter(|&t| s.is_separator(p.token_at_frame()[t])).count()
    };
    ensure!(sep_frames(&pm) == n, "modified path leaves planted frames off the separator");
    ensure!(sep_frames(&ps) < n, "standard path puts every planted frame on a separator");
    let under_mod = path_score(&f.emissions, &s, modified, ps.token_at_frame());
    let under_std = path_score(&f.emissions, &s, Variant::Standard, pm.token_at_frame());
    ensure!(pm.score() > under_mod, "modified path not preferred under modified scoring");
    ensure!(ps.score() >= under_std, "standard path not optimal under standard scoring");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("modified covers {mc}/{n} planted frames, standard {sc}/{n}"))
}

fn a5() -> Outcome {
    // Gap [1.0, 2.0) s; a 0.2 s word starting at 0.80, 0.81, ..., 2.00 s. Work in centiseconds.
    let gap = Gap::new(1.0, 2.0);
    let mut flips = Vec::new();
    let mut prev = GapLabel::Empty;
    for k in 0..=120i64 {
        let (ws, we) = (80 + k, 100 + k);
        let overlap_cs = (we.min(200) - ws.max(100)).max(0);
        let expected = if 2 * overlap_cs > we - ws { GapLabel::Speech } else { GapLabel::Empty };
        let word = RefWord::new("w", ws as f64 / 100.0, we as f64 / 100.0, false);
        let got = label_gap(&gap, &[word], 0.5);
        ensure!(got == expected, "start {:.2}: overlap {overlap_cs} cs, got {got} want {expected}", ws as f64 / 100.0);
        if got != prev {
            flips.push((ws, got));
        }
        prev = got;
    }
    ensure!(
        flips == vec![(91, GapLabel::Speech), (190, GapLabel::Empty)],
        "unexpected flips {flips:?}"
    );
    Ok("121 positions, flips at 0.91 s (to speech) and 1.90 s (to empty)".into())
}

fn lev_oracle(a: &[usize], b: &[usize], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if i == 0 {
        return j;
    }
    if j == 0 {
        return i;
    }
    if let Some(&v) = memo.get(&(i, j)) {
        return v;
    }
    let sub = lev_oracle(a, b, i - 1, j - 1, memo) + usize::from(a[i - 1] != b[j - 1]);
    let del = lev_oracle(a, b, i - 1, j, memo) + 1;
    let ins = lev_oracle(a, b, i, j - 1, memo) + 1;
    let v = sub.min(del).min(ins);
    memo.insert((i, j), v);
    v
}

fn a6() -> Outcome {
    const ALPHABET: [&str; 5] = ["um", "the", "cat", "Sat", "on"];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..1000 {
        let a: Vec<usize> = (0..rng.random_range(0..=10)).map(|_| rng.random_range(0..5)).collect();
        let b: Vec<usize> = (0..rng.random_range(0..=10)).map(|_| rng.random_range(0..5)).collect();
        let ra: Vec<&str> = a.iter().map(|&i| ALPHABET[i]).collect();
        // Comparison is case-insensitive.
        let hb: Vec<String> = b.iter().map(|&i| ALPHABET[i].to_uppercase()).collect();
        let pairs = levenshtein_align(&ra, &hb);
        let c = EditCounts::from_pairs(&pairs);
        let want = lev_oracle(&a, &b, a.len(), b.len(), &mut HashMap::new());
        ensure!(c.distance() == want, "case {case}: {} vs {want}", c.distance());
        ensure!(c.reference_words() == a.len(), "case {case}: reference count");
        ensure!(c.matches + c.substitutions + c.insertions == b.len(), "case {case}: hypothesis count");
        match c.wer() {
            Ok(w) => ensure!(
                w == (c.substitutions + c.deletions + c.insertions) as f64 / a.len() as f64,
                "case {case}: wer"
            ),
            Err(_) => ensure!(a.is_empty(), "case {case}: wer failed on non-empty reference"),
        }
    }
    Ok("1000 pairs".into())
}

fn a7() -> Outcome {
    let cfg = SegmentConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut segments, mut indivisible) = (0, 0);
    for case in 0..200 {
        let limit = rng.random_range(10.0..300.0);
        let mut words = Vec::new();
        let mut t = rng.random_range(0.0..3.0);
        loop {
            // Occasional long stretches of unbroken speech force over-long segments.
            let len = if rng.random_bool(0.03) {
                rng.random_range(8.0..25.0)
            } else {
                rng.random_range(0.1..1.2)
            };
            if t + len > limit {
                break;
            }
            words.push(RefWord::new("w", t, t + len, false));
            let pause = match rng.random_range(0..10) {
                0 => rng.random_range(5.0..15.0),
                1 | 2 => rng.random_range(1.0..5.0),
                _ => rng.random_range(0.0..0.6),
            };
            t += len + pause;
        }
        if words.is_empty() {
            continue;
        }
        let segs = plan_segments(&words, limit, &cfg);
        ensure!(segs[0].start == 0.0 && segs[0].first_word == 0, "case {case}: first segment");
        let last = segs.last().unwrap();
        ensure!(
            last.end == limit.max(words.last().unwrap().end) && last.last_word == words.len() - 1,
            "case {case}: last segment"
        );
        for pair in segs.windows(2) {
            ensure!(pair[0].end == pair[1].start, "case {case}: segments do not tile");
            ensure!(pair[0].last_word + 1 == pair[1].first_word, "case {case}: words skipped");
            let cut = pair[1].start;
            let (before, after) = (&words[pair[0].last_word], &words[pair[1].first_word]);
            ensure!(before.end <= cut && cut <= after.start, "case {case}: cut {cut} inside a word");
            for w in &words {
                ensure!(!(w.start < cut && cut < w.end), "case {case}: cut {cut} inside a word");
            }
        }
        let cuts: Vec<f64> = segs.iter().skip(1).map(|s| s.start).collect();
        for i in 0..words.len() - 1 {
            let silence = words[i + 1].start - words[i].end;
            if silence > cfg.silence_split {
                let mid = (words[i].end + words[i + 1].start) / 2.0;
                ensure!(cuts.contains(&mid), "case {case}: {silence:.2} s silence not cut at its midpoint");
            }
        }
        for s in &segs {
            segments += 1;
            if s.duration() > cfg.max_segment {
                ensure!(is_indivisible(&words, s, &cfg), "case {case}: long divisible segment");
                indivisible += 1;
            }
        }
    }
    Ok(format!("{segments} segments, {indivisible} over-long and indivisible"))
}

fn a8() -> Outcome {
    let mut grids = 0;
    for tp in 0..=5usize {
        for fp in 0..=5usize {
            for fn_ in 0..=5usize {
                for tn in 0..=5usize {
                    let mut preds = BTreeMap::new();
                    let mut truth = BTreeMap::new();
                    let mut k = 0;
                    for (n, p, t) in [
                        (tp, GapLabel::Speech, GapLabel::Speech),
                        (fp, GapLabel::Speech, GapLabel::Empty),
                        (fn_, GapLabel::Empty, GapLabel::Speech),
                        (tn, GapLabel::Empty, GapLabel::Empty),
                    ] {
                        for _ in 0..n {
                            preds.insert(format!("g{k}"), p);
                            truth.insert(format!("g{k}"), t);
                            k += 1;
                        }
                    }
                    let got = eval_classifier(&preds, &truth);
                    if k == 0 {
                        ensure!(got.is_err(), "empty grid must fail");
                        continue;
                    }
                    let m = got.map_err(|e| e.to_string())?;
                    ensure!((m.tp, m.fp, m.fn_, m.tn) == (tp, fp, fn_, tn), "confusion {tp},{fp},{fn_},{tn}");
                    let acc = (tp + tn) as f64 / k as f64;
                    let prec = (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64);
                    let rec = (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64);
                    let f1 = (prec.is_some() && rec.is_some() && tp > 0).then(|| 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64);
                    ensure!(m.accuracy == acc, "accuracy at {tp},{fp},{fn_},{tn}");
                    ensure!(m.precision == prec, "precision at {tp},{fp},{fn_},{tn}");
                    ensure!(m.recall == rec, "recall at {tp},{fp},{fn_},{tn}");
                    let f1_ok = match (m.f1, f1) {
                        (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
                        (None, None) => true,
                        _ => false,
                    };
                    ensure!(f1_ok, "f1 at {tp},{fp},{fn_},{tn}: {:?} vs {f1:?}", m.f1);
                    grids += 1;
                }
            }
        }
    }
    // Reported precision and recall imply the reported F1.
    let (p, r) = (0.8614f64, 0.7480f64);
    let f1 = 2.0 * p * r / (p + r);
    ensure!((f1 - 0.8007).abs() < 5e-5, "F1 from P=0.8614 R=0.7480 is {f1:.6}");
    let _ = ClassifierMetrics::from_confusion(1, 0, 0, 0).map_err(|e| e.to_string())?;
    Ok(format!("{grids} confusion matrices, reported F1 consistent ({f1:.4})"))
}

fn a9() -> Outcome {
    let start = Instant::now();
    let synth = synthetic_corpus(10, 42);
    let planted: usize = synth.iter().map(|u| u.planted.len()).sum();
    let ref_words: usize = synth.iter().map(|u| u.reference.len()).sum();
    let corpus: Vec<Utterance> = synth.into_iter().map(Utterance::from).collect();
    let cfg = PipelineConfig::default();
    let r = evaluate(&corpus, &cfg, None, Vec::new()).map_err(|e| e.to_string())?;
    ensure!(r.failures.is_empty(), "failures: {:?}", r.failures);
    let d = &r.detection;
    ensure!(d.transcribed.total() + d.untranscribed.total() == ref_words, "detection rows do not partition words");
    ensure!(d.untranscribed.total() == r.wer.deletions, "untranscribed row != deletions");
    ensure!(
        d.transcribed.total() == r.wer.matches + r.wer.substitutions,
        "transcribed row != aligned reference words"
    );
    ensure!(d.untranscribed.total() == planted, "untranscribed {} vs planted {planted}", d.untranscribed.total());
    let c = &r.categorization;
    ensure!(c.total() == ref_words, "categorization does not partition words");
    ensure!(
        c.fluent.untranscribed + c.disfluent.untranscribed == r.wer.deletions,
        "categorization untranscribed != deletions"
    );
    let detected = d.untranscribed.classified_and_covered;
    ensure!(5 * detected >= 4 * planted, "detected {detected} of {planted} planted words");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "{detected}/{planted} planted words detected, {} gaps, classifier {:?}",
        r.gaps.len(),
        r.classifier.map(|m| (m.accuracy, m.f1))
    ))
}
