use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use murmur2vec::manifest::RunManifest;

const SPEC: &str = r#"{"n_classes": 3, "seqs_per_class": 20, "base_length": 120,
    "mutations_per_class": 3, "noise_rate": 0.01, "rng_seed": 11}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_murmur2vec"));
    c.env_remove("MURMUR2VEC_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the spec and synthesizes a small labeled corpus into `dir`.
fn corpus(dir: &Path) -> (PathBuf, PathBuf) {
    let spec = dir.join("spec.json");
    std::fs::write(&spec, SPEC).unwrap();
    assert_eq!(code(&["synth", "--spec", s(&spec), "--name", "c", "--out-dir", s(dir)]), 0);
    (dir.join("c.fa"), dir.join("c.labels.csv"))
}

#[test]
fn hash_prints_hex_digest() {
    let out = run(&["hash", "", "--seed", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "514e28b7");
    let out = run(&["hash", "aaaa", "--seed", "0x9747b28c"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "5a97808a");
}

#[test]
fn argument_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (fa, labels) = corpus(dir.path());
    let base = ["--fasta", s(&fa), "--labels", s(&labels), "--out-dir", s(dir.path())];
    let with = |extra: &[&'static str], cmd: &'static str| {
        let mut a = vec![cmd];
        a.extend_from_slice(&base);
        a.extend_from_slice(extra);
        code(&a)
    };
    assert_eq!(with(&["--table-size", "64", "--collision-target", "0.1"], "embed"), 2);
    assert_eq!(with(&["--table-size", "64", "--runs", "0"], "evaluate"), 2);
    assert_eq!(with(&[], "embed"), 2);
    assert_eq!(with(&["--table-size", "0"], "embed"), 2);
    assert_eq!(with(&["--table-size", "64", "--threads", "0"], "embed"), 2);
    assert_eq!(code(&["frobnicate"]), 2);
}

#[test]
fn io_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = d.join("missing.fa");
    assert_eq!(code(&["tune", "--fasta", s(&missing), "--out-dir", s(d)]), 3);

    let empty = d.join("empty.fa");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&["tune", "--fasta", s(&empty), "--out-dir", s(d)]), 4);

    let unlabeled = d.join("u.fa");
    std::fs::write(&unlabeled, ">a\nMKVLAAGIV\n>b\nMKVLSAGIV\n").unwrap();
    assert_eq!(
        code(&["evaluate", "--fasta", s(&unlabeled), "--table-size", "64", "--out-dir", s(d)]),
        4
    );

    let short = d.join("short.fa");
    std::fs::write(&short, ">a\nMKVLAAGIV\n>b\nMK\n").unwrap();
    assert_eq!(code(&["embed", "--fasta", s(&short), "--table-size", "64", "--out-dir", s(d)]), 4);
    assert_eq!(
        code(&["embed", "--fasta", s(&short), "--table-size", "64", "--skip-short", "--out-dir", s(d)]),
        0
    );
}

#[test]
fn synth_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    corpus(a.path());
    corpus(b.path());
    for f in ["c.fa", "c.labels.csv", "c.spec.json"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn manifest_replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (fa, labels) = corpus(dir.path());
    let out = dir.path().join("first");
    let args = [
        "embed", "--fasta", s(&fa), "--labels", s(&labels), "--collision-target", "0.05",
        "--format", "sparse", "--out-dir", s(&out),
    ];
    assert_eq!(code(&args), 0);
    let manifest = RunManifest::read(&out.join("embed.manifest.json")).unwrap();
    assert_eq!(manifest.command, args);
    assert_eq!(manifest.input_digests.len(), 2);
    assert!(manifest.timings.contains_key("embedding_generation_s"));

    let replay = dir.path().join("replay");
    let mut command = manifest.command.clone();
    let at = command.iter().position(|a| a == "--out-dir").unwrap();
    command[at + 1] = s(&replay).to_string();
    assert!(bin().args(&command).status().unwrap().success());
    for f in ["embedding.triplets.csv", "embedding.json"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(replay.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (fa, labels) = corpus(dir.path());
    let mut files = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let common = ["--fasta", s(&fa), "--labels", s(&labels), "--threads", threads, "--out-dir", s(&out)];
        let mut embed = vec!["embed", "--table-size", "256"];
        embed.extend_from_slice(&common);
        assert_eq!(code(&embed), 0);
        let mut eval = vec!["evaluate", "--collision-target", "0.2", "--runs", "3"];
        eval.extend_from_slice(&common);
        assert_eq!(code(&eval), 0);
        files.push(["embedding.csv", "embedding.json", "metrics.json"].map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn tune_writes_curve_for_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (fa, _) = corpus(dir.path());
    assert_eq!(code(&["tune", "--fasta", s(&fa), "--grid", "40,10,0", "--out-dir", s(dir.path())]), 0);
    let curve = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let rows: Vec<&str> = curve.lines().collect();
    assert_eq!(rows.len(), 4);
    let m: Vec<u64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(m.windows(2).all(|w| w[0] <= w[1]), "{m:?}");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (fa, _) = corpus(d);
    let config = d.join("config.json");
    std::fs::write(&config, r#"{"k": 2, "table_size": 32}"#).unwrap();
    let out = d.join("o");
    let base = ["embed", "--fasta", s(&fa), "--config", s(&config), "--out-dir", s(&out)];
    assert_eq!(code(&base), 0);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("embedding.json")).unwrap()).unwrap();
    assert_eq!((side["k"].as_u64(), side["m"].as_u64()), (Some(2), Some(32)));

    let mut flags = base.to_vec();
    flags.extend(["--k", "4"]);
    assert_eq!(code(&flags), 0);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("embedding.json")).unwrap()).unwrap();
    assert_eq!(side["k"].as_u64(), Some(4));

    std::fs::write(&config, r#"{"kay": 2}"#).unwrap();
    assert_eq!(code(&base), 2);
}

#[test]
fn bench_reports_equal_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let (fa, _) = corpus(dir.path());
    assert_eq!(code(&["bench", "--fasta", s(&fa), "--repeats", "3", "--out-dir", s(dir.path())]), 0);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(r["murmur2vec"][0]["dimension"], r["vocabulary_size"]);
    assert_eq!(code(&["bench", "--fasta", s(&fa), "--repeats", "2", "--out-dir", s(dir.path())]), 2);
}
