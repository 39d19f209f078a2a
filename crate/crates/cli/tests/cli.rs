use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use turkpos::corpus::{self, SAMPLE_CORPUS, SAMPLE_RAW_TEXT};

fn turkpos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_turkpos")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL_TRAIN: &str = "[train]\nepochs = 40\nlearning_rate = 0.02\nembed_dim = 12\nhidden_dim = 12\n";

#[test]
fn gradcheck_passes() {
    for seed in ["0", "1"] {
        let out = turkpos(&["gradcheck", "--seed", seed]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(stdout(&out).starts_with("max relative error"));
    }
}

#[test]
fn gradcheck_fails_when_differences_are_swamped_by_roundoff() {
    let out = turkpos(&["gradcheck", "--epsilon", "1e-11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("gradient check failed"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(turkpos(&[]).status.code(), Some(2));
    assert_eq!(turkpos(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(turkpos(&["tag", "--model", "m"]).status.code(), Some(2));
    assert_eq!(turkpos(&["gradcheck", "--seed", "x"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    let out = turkpos(&["eval", "--model", "/nonexistent/model.blstm", "--corpus", "c.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr(&out).lines().count(), 1);
}

#[test]
fn train_tag_eval_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus_path = dir.path().join("seed.tsv");
    let config = dir.path().join("turkpos.toml");
    fs::write(&corpus_path, SAMPLE_CORPUS).unwrap();
    fs::write(&config, SMALL_TRAIN).unwrap();

    let a = dir.path().join("a.blstm");
    let b = dir.path().join("b.blstm");
    for model in [&a, &b] {
        let out = turkpos(&[
            "train",
            "--corpus",
            path(&corpus_path),
            "--config",
            path(&config),
            "--out",
            path(model),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("epoch")).count(), 40);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let out = turkpos(&[
        "train",
        "--corpus",
        path(&corpus_path),
        "--config",
        path(&config),
        "--seed",
        "3",
        "--out",
        path(&b),
    ]);
    assert!(out.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let out = turkpos(&[
        "tag",
        "--model",
        path(&a),
        "--text",
        "Küçük kedi süt içti. Ben okula gittim.",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let tagged = corpus::parse(&stdout(&out)).unwrap();
    assert_eq!(tagged.len(), 2);
    assert_eq!(tagged.sentences()[1].tokens(), ["ben", "okula", "gittim"]);

    let out = turkpos(&["tag", "--model", path(&a), "--text", "", "--format", "structured"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no tokens left after cleaning"));

    let raw = dir.path().join("raw.txt");
    fs::write(&raw, "Kedi uyudu.").unwrap();
    let out = turkpos(&["tag", "--model", path(&a), "--in", path(&raw), "--format", "structured"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["sentences"][0]["tokens"], serde_json::json!(["kedi", "uyudu"]));

    let out = turkpos(&["eval", "--model", path(&a), "--corpus", path(&corpus_path)]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("token accuracy"));
    let out = turkpos(&[
        "eval",
        "--model",
        path(&a),
        "--corpus",
        path(&corpus_path),
        "--format",
        "structured",
    ]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["tokens"], corpus::parse(SAMPLE_CORPUS).unwrap().token_count());
}

#[test]
fn preprocess_and_bootstrap() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    let tokens = dir.path().join("tokens.txt");
    let seed = dir.path().join("seed.tsv");
    let labeled = dir.path().join("labeled.tsv");
    fs::write(&raw, SAMPLE_RAW_TEXT).unwrap();
    fs::write(&seed, SAMPLE_CORPUS).unwrap();

    assert!(turkpos(&["preprocess", "--in", path(&raw), "--out", path(&tokens)])
        .status
        .success());
    let lines = fs::read_to_string(&tokens).unwrap();
    let expected: Vec<String> = turkpos::preprocess::preprocess_document(SAMPLE_RAW_TEXT)
        .iter()
        .map(|s| s.tokens().join(" "))
        .collect();
    assert_eq!(lines.lines().collect::<Vec<_>>(), expected);

    let out = turkpos(&[
        "bootstrap-label",
        "--corpus",
        path(&seed),
        "--raw",
        path(&raw),
        "--k",
        "0.05",
        "--out",
        path(&labeled),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let corpus = corpus::load(&labeled).unwrap();
    assert_eq!(corpus.len(), expected.len());

    let out = turkpos(&[
        "bootstrap-label",
        "--corpus",
        path(&seed),
        "--raw",
        path(&raw),
        "--k",
        "0",
        "--out",
        path(&labeled),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
