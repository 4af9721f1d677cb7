use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn vsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vsec"))
        .arg("--threads")
        .arg("1")
        .args(args)
        .output()
        .expect("failed to start vsec")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus.txt")
}

fn ok(args: &[&str]) -> Output {
    let out = vsec(args);
    assert!(
        out.status.success(),
        "vsec {args:?} exited with {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn help_exits_zero() {
    let out = vsec(&["evaluate", "--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("--test"));
}

#[test]
fn missing_flag_is_a_usage_error() {
    let out = vsec(&["train-tokenizer", "--in", "x.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--out"));
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = vsec(&[
        "preprocess",
        "--in",
        "/nonexistent/corpus.txt",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "num_heads = 7\n").unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let out = vsec(&[
        "train",
        "--data",
        &p("d"),
        "--tokenizer",
        &p("t"),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        &p("c"),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn smoke_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let corpus = fixture();

    ok(&[
        "preprocess",
        "--in",
        corpus.to_str().unwrap(),
        "--out",
        &p("clean.txt"),
        "--unigram-out",
        &p("uni.tsv"),
    ]);
    let clean = fs::read_to_string(p("clean.txt")).unwrap();
    assert_eq!(clean.lines().count(), 100);
    assert!(clean
        .lines()
        .all(|l| !l.is_empty() && l == l.to_lowercase()));

    ok(&[
        "train-tokenizer",
        "--in",
        &p("clean.txt"),
        "--merges",
        "200",
        "--mode",
        "bpe",
        "--out",
        &p("tok.txt"),
    ]);
    assert!(fs::read_to_string(p("tok.txt"))
        .unwrap()
        .starts_with("vsec-bpe v1 mode=bpe"));

    ok(&[
        "corrupt",
        "--in",
        &p("clean.txt"),
        "--rate",
        "0.2",
        "--seed",
        "7",
        "--out",
        &p("train.jsonl"),
    ]);
    let pairs = fs::read_to_string(p("train.jsonl")).unwrap();
    assert_eq!(pairs.lines().count(), 100);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p("train.jsonl.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    // Same seed, same file.
    ok(&[
        "corrupt",
        "--in",
        &p("clean.txt"),
        "--rate",
        "0.2",
        "--seed",
        "7",
        "--out",
        &p("again.jsonl"),
    ]);
    assert_eq!(pairs, fs::read_to_string(p("again.jsonl")).unwrap());

    fs::write(p("cfg.toml"), "embedding_dimension = 16\nnum_heads = 2\nnum_layers = 1\nsequence_length = 64\nbatch_size = 16\n").unwrap();
    let train = ok(&[
        "train",
        "--data",
        &p("train.jsonl"),
        "--tokenizer",
        &p("tok.txt"),
        "--config",
        &p("cfg.toml"),
        "--epochs",
        "1",
        "--learning-rate",
        "0.001",
        "--seed",
        "3",
        "--out",
        &p("model.ckpt"),
        "--log-every",
        "1",
    ]);
    let log = String::from_utf8_lossy(&train.stderr);
    assert!(log.contains("event=config"), "{log}");
    assert!(log.contains("train.embedding_dimension=16"), "{log}");
    assert!(log.contains("train.learning_rate=0.001"), "{log}");
    assert!(log.contains("event=step epoch=1 step=1 loss="), "{log}");
    assert!(log.contains("event=epoch epoch=1"), "{log}");
    assert!(Path::new(&p("model.ckpt.unigram")).exists());

    ok(&[
        "correct",
        "--tokenizer",
        &p("tok.txt"),
        "--ckpt",
        &p("model.ckpt"),
        "--in",
        corpus.to_str().unwrap(),
        "--out",
        &p("fixed.txt"),
    ]);
    assert_eq!(
        fs::read_to_string(p("fixed.txt")).unwrap().lines().count(),
        100
    );
    let one = ok(&[
        "correct",
        "--tokenizer",
        &p("tok.txt"),
        "--ckpt",
        &p("model.ckpt"),
        "--text",
        "Tôi đọc sách",
    ]);
    assert_eq!(String::from_utf8_lossy(&one.stdout).lines().count(), 1);

    let eval = ok(&[
        "evaluate",
        "--tokenizer",
        &p("tok.txt"),
        "--ckpt",
        &p("model.ckpt"),
        "--test",
        &p("train.jsonl"),
        "--report",
        &p("report.json"),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    for k in ["dp", "dr", "df", "cp", "cr", "cf"] {
        let v = report[k].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{k} = {v}");
    }
    assert!(report["counts"]["actual_errors"].as_u64().unwrap() > 0);
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p("report.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn evaluate_scores_prediction_triples() {
    let dir = tempfile::tempdir().unwrap();
    let test = dir.path().join("t.jsonl");
    fs::write(
        &test,
        "{\"text\":\"a b c\",\"predict\":\"a x d\",\"correct\":\"a x c\"}\n",
    )
    .unwrap();
    let out = ok(&["evaluate", "--test", test.to_str().unwrap()]);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["dp"], 0.5);
    assert_eq!(r["dr"], 1.0);
    assert_eq!(r["cp"], 0.5);
    assert_eq!(r["cr"], 1.0);
}
