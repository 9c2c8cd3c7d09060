use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gapalign_core::io::{write_emissions, write_hyp_transcript, HypTranscript};
use gapalign_core::synthetic::{FrameWriter, FRAME_DURATION};

fn gapalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapalign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = gapalign(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, count: usize) -> PathBuf {
    let out = ok(&["synth", "--out-dir", s(dir), "--count", &count.to_string()]);
    PathBuf::from(out.trim())
}

fn error_code(out: &Output) -> String {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("error record on stderr");
    let v: serde_json::Value = serde_json::from_str(line).expect("stderr ends with a json record");
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn infeasible_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut w = FrameWriter::default();
    w.silence(2);
    let em = dir.path().join("short.em");
    write_emissions(&w.finish(FRAME_DURATION), &em).unwrap();
    let hyp = dir.path().join("hyp.txt");
    write_hyp_transcript(&HypTranscript::parse("long words").unwrap(), &hyp).unwrap();

    let out = gapalign(&["align", "--emissions", s(&em), "--hyp", s(&hyp)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "path_infeasible");
}

#[test]
fn missing_input_exits_with_one() {
    let out = gapalign(&["align", "--emissions", "/nonexistent.em", "--hyp", "/nonexistent.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_code(&out), "io");
}

#[test]
fn invalid_config_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "min_gap = -1.0\n").unwrap();
    let manifest = synth(dir.path(), 1);
    let out = gapalign(&["evaluate", "--manifest", s(&manifest), "--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "invalid");

    let out = gapalign(&["evaluate", "--manifest", s(&manifest), "--c=0.5"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn batch_alignment_matches_sequential_runs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("corpus"), 3);
    let out_dir = dir.path().join("aligned");
    let summary = ok(&["align", "--manifest", s(&manifest), "--out-dir", s(&out_dir)]);
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["aligned"].as_array().unwrap().len(), 3);
    assert!(summary["failures"].as_array().unwrap().is_empty());

    let corpus = manifest.parent().unwrap();
    for id in ["utt000", "utt001", "utt002"] {
        let single = ok(&[
            "align",
            "--emissions",
            s(&corpus.join(format!("{id}.em"))),
            "--hyp",
            s(&corpus.join(format!("{id}.hyp.txt"))),
        ]);
        let batch = fs::read_to_string(out_dir.join(format!("{id}.align.json"))).unwrap();
        assert_eq!(single, batch, "{id}");
    }
}

#[test]
fn batch_records_failures_without_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 2);
    let text = fs::read_to_string(&manifest).unwrap() + "broken missing.em missing.txt - -\n";
    fs::write(&manifest, text).unwrap();
    let out_dir = dir.path().join("aligned");
    let summary = ok(&["align", "--manifest", s(&manifest), "--out-dir", s(&out_dir)]);
    let summary: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(summary["aligned"].as_array().unwrap().len(), 2);
    assert_eq!(summary["failures"][0]["utterance"], "broken");
    assert_eq!(summary["failures"][0]["error"], "io");
}

#[test]
fn evaluate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 4);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    ok(&["evaluate", "--manifest", s(&manifest), "-o", s(&a), "--series", s(&csv_a)]);
    ok(&["evaluate", "--manifest", s(&manifest), "-o", s(&b), "--series", s(&csv_b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&csv_a).unwrap(), fs::read(&csv_b).unwrap());

    let report: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let rows = report["alignment_scores"].as_array().unwrap();
    let all_words: Vec<_> = rows.iter().filter(|r| r["scope"] == "all_words").collect();
    assert_eq!(all_words.len(), 3);
    assert!(report["detection"]["untranscribed"]["classified_and_covered"].as_u64().unwrap() >= 1);
}

#[test]
fn evaluate_without_gaps_leaves_every_word_unclassified() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 3);
    let report = ok(&["evaluate", "--manifest", s(&manifest), "--min-gap", "1000"]);
    let r: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(r["gaps"].as_array().unwrap().is_empty());
    assert!(r["classifier"].is_null());
    let d = &r["detection"];
    for row in ["transcribed", "untranscribed"] {
        assert_eq!(d[row]["classified_and_covered"], 0);
        assert_eq!(d[row]["classified_but_uncovered"], 0);
    }
    let wer = &r["wer"];
    assert_eq!(d["untranscribed"]["not_classified"], wer["deletions"]);
    assert_eq!(
        d["transcribed"]["not_classified"].as_u64().unwrap(),
        wer["matches"].as_u64().unwrap() + wer["substitutions"].as_u64().unwrap()
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 1);
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "min_gap = 0.5\nc = -1.0\n").unwrap();
    let report = ok(&["evaluate", "--manifest", s(&manifest), "--config", s(&cfg), "--min-gap", "0.4"]);
    let r: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(r["config"]["min_gap"], 0.4);
    assert_eq!(r["config"]["c"], -1.0);
}

#[test]
fn single_utterance_commands() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(dir.path(), 1);
    let c = manifest.parent().unwrap();
    let (em, hyp, rf, attn) = (
        c.join("utt000.em"),
        c.join("utt000.hyp.txt"),
        c.join("utt000.ref.txt"),
        c.join("utt000.attn"),
    );
    let al = dir.path().join("a.json");
    ok(&["align", "--emissions", s(&em), "--hyp", s(&hyp), "--c=-0.5", "-o", s(&al)]);

    let gaps: serde_json::Value =
        serde_json::from_str(&ok(&["gaps", "--emissions", s(&em), "--alignment", s(&al), "--reference", s(&rf)]))
            .unwrap();
    for g in gaps.as_array().unwrap() {
        assert!(g["label"].is_string() && g["predicted"].is_string());
    }

    let scores: serde_json::Value =
        serde_json::from_str(&ok(&["score", "--reference", s(&rf), "--alignment", s(&al)])).unwrap();
    assert_eq!(scores[0]["scope"], "all_words");
    let combined = scores[0]["combined"].as_f64().unwrap();
    assert!(combined > 0.0 && combined <= 1.0);

    let wer: serde_json::Value = serde_json::from_str(&ok(&["wer", "--reference", s(&rf), "--hyp", s(&hyp)])).unwrap();
    assert_eq!(wer["wer"]["insertions"], 0);
    assert!(wer["wer"]["deletions"].as_u64().unwrap() >= 1);

    let segs: serde_json::Value = serde_json::from_str(&ok(&["segment", "--reference", s(&rf)])).unwrap();
    assert_eq!(segs.as_array().unwrap().len(), 1);

    let attn_align = ok(&["align", "--variant", "attention", "--attention", s(&attn)]);
    assert!(attn_align.contains("\"word_index\""));
    let out = gapalign(&["align", "--variant", "attention", "--emissions", s(&em), "--hyp", s(&hyp)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn classify_and_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = synth(&dir.path().join("corpus"), 5);
    let report: serde_json::Value = serde_json::from_str(&ok(&["classify", "--manifest", s(&manifest)])).unwrap();
    let gaps = report["gaps"].as_array().unwrap();
    assert!(!gaps.is_empty());

    // Feed the baseline's own decisions back as external predictions.
    let preds: String = gaps
        .iter()
        .map(|g| {
            format!(
                "{} {} {}\n",
                g["id"].as_str().unwrap(),
                g["predicted"].as_str().unwrap(),
                g["score"].as_f64().unwrap()
            )
        })
        .collect();
    let pf = dir.path().join("preds.txt");
    fs::write(&pf, &preds).unwrap();
    let ext: serde_json::Value = serde_json::from_str(&ok(&[
        "classify",
        "--manifest",
        s(&manifest),
        "--classifier",
        "external",
        "--predictions",
        s(&pf),
    ]))
    .unwrap();
    assert_eq!(ext["classifier"], report["classifier"]);

    let partial = dir.path().join("partial.txt");
    fs::write(&partial, preds.lines().next().unwrap()).unwrap();
    let out = gapalign(&["classify", "--manifest", s(&manifest), "--classifier", "external", "--predictions", s(&partial)]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "missing_gap_id");

    let out_dir = dir.path().join("ds");
    let summary: serde_json::Value =
        serde_json::from_str(&ok(&["dataset", "--manifest", s(&manifest), "--out-dir", s(&out_dir), "--seed", "3"]))
            .unwrap();
    let (train, test) = (summary["train"].as_u64().unwrap(), summary["test"].as_u64().unwrap());
    assert_eq!(train + test, gaps.len() as u64);
    let first = fs::read(out_dir.join("train.tsv")).unwrap();
    ok(&["dataset", "--manifest", s(&manifest), "--out-dir", s(&out_dir), "--seed", "3"]);
    assert_eq!(first, fs::read(out_dir.join("train.tsv")).unwrap());
}
