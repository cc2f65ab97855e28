use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn hopwalk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopwalk"))
        .current_dir(dir)
        .env_remove("HOPWALK_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

/// Small synthetic graph and pairs in `dir`.
fn synth(dir: &Path) {
    ok(&hopwalk(
        dir,
        &["synth", "--communities", "2", "--authors-per-community", "30", "--eval-fraction", "0.2", "--seed", "3"],
    ));
}

fn sample(dir: &Path, k: &str, out: &str) {
    ok(&hopwalk(
        dir,
        &["sample", "--graph", "graph.tsv", "-k", k, "--iterations", "3", "--length", "20", "--seed", "1", "--out", out],
    ));
}

fn train(dir: &Path, corpus: &str, dim: &str, out: &str) {
    ok(&hopwalk(
        dir,
        &["train", "--corpus", corpus, "--dim", dim, "--epochs", "1", "--seed", "1", "--out", out],
    ));
}

#[test]
fn missing_input_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = hopwalk(dir.path(), &["sample", "--graph", "no/such/graph.tsv", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/graph.tsv"));

    let out = hopwalk(dir.path(), &["pipeline", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.toml"));
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = hopwalk(dir.path(), &["sample", "--graph", "graph.tsv", "-k", "-1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = hopwalk(dir.path(), &["sample", "--graph", "graph.tsv", "--length", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let out = hopwalk(dir.path(), &["pipeline", "--set", "train.dims=3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("graph.tsv"), "author:a\tnot-a-typed-node\n").unwrap();
    let out = hopwalk(dir.path(), &["sample", "--graph", "graph.tsv", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    sample(dir.path(), "1", "a.txt");
    sample(dir.path(), "1", "b.txt");
    assert_eq!(sha(&dir.path().join("a.txt")), sha(&dir.path().join("b.txt")));
    let out = hopwalk(
        dir.path(),
        &["sample", "--graph", "graph.tsv", "--iterations", "3", "--length", "20", "--seed", "1", "--workers", "3", "--out", "c.txt"],
    );
    ok(&out);
    assert_eq!(sha(&dir.path().join("a.txt")), sha(&dir.path().join("c.txt")));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    sample(dir.path(), "1", "a.txt");
    let out = Command::new(env!("CARGO_BIN_EXE_hopwalk"))
        .current_dir(dir.path())
        .env("HOPWALK_SEED", "1")
        .args(["sample", "--graph", "graph.tsv", "--iterations", "3", "--length", "20", "--out", "env.txt"])
        .output()
        .unwrap();
    ok(&out);
    assert_eq!(sha(&dir.path().join("a.txt")), sha(&dir.path().join("env.txt")));
}

fn embedding_dim(path: &Path) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let header = text.lines().next().unwrap();
    header.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn concat_adds_dimensions_and_checks_vocabularies() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    sample(d, "0", "c0.txt");
    sample(d, "1", "c1.txt");
    train(d, "c0.txt", "8", "e0.txt");
    train(d, "c1.txt", "12", "e1.txt");
    assert!(d.join("e0.txt.meta.toml").exists());
    ok(&hopwalk(d, &["concat", "e0.txt", "e1.txt", "--out", "both.txt"]));
    assert_eq!(embedding_dim(&d.join("both.txt")), 20);
    let first = std::fs::read_to_string(d.join("e0.txt")).unwrap();
    let both = std::fs::read_to_string(d.join("both.txt")).unwrap();
    let row = first.lines().nth(1).unwrap();
    let key = row.split_whitespace().next().unwrap();
    let joined = both.lines().find(|l| l.split_whitespace().next() == Some(key)).unwrap();
    assert!(joined.starts_with(row));

    ok(&hopwalk(d, &["concat", "e0.txt", "--out", "same.txt"]));
    assert_eq!(std::fs::read(d.join("e0.txt")).unwrap(), std::fs::read(d.join("same.txt")).unwrap());

    // drop one row to break the shared vocabulary
    let mut lines: Vec<&str> = first.lines().collect();
    lines.pop();
    let n = lines.len() - 1;
    lines[0] = "";
    let mut text = format!("{n} 8");
    for l in &lines[1..] {
        text.push('\n');
        text.push_str(l);
    }
    text.push('\n');
    std::fs::write(d.join("short.txt"), text).unwrap();
    let out = hopwalk(d, &["concat", "e0.txt", "short.txt", "--out", "bad.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("vocab"));
}

#[test]
fn evaluate_prints_a_classifier_by_method_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d);
    sample(d, "0", "c0.txt");
    sample(d, "1", "c1.txt");
    train(d, "c0.txt", "8", "e0.txt");
    train(d, "c1.txt", "8", "e1.txt");
    let stdout = ok(&hopwalk(
        d,
        &[
            "evaluate", "-e", "k0=e0.txt", "-e", "k1=e1.txt", "--pairs", "pairs.tsv", "--repeats", "3", "--seed", "5",
            "--records-out", "report.kv",
        ],
    ));
    let table: Vec<&str> = stdout.lines().filter(|l| l.contains('|')).collect();
    assert_eq!(table.len(), 3, "{stdout}");
    assert!(table[0].contains("RW-(K=0)") && table[0].contains("RW-(K=1)"));
    assert!(table[1].starts_with("LR") && table[2].starts_with("NB"));
    let records = std::fs::read_to_string(d.join("report.kv")).unwrap();
    assert_eq!(records.lines().filter(|l| l.starts_with("classifier=")).count(), 4);

    let unseeded = ok(&hopwalk(d, &["evaluate", "-e", "e0.txt", "--pairs", "pairs.tsv", "--repeats", "2"]));
    assert!(unseeded.contains("seed: "), "{unseeded}");
}

#[test]
fn pipeline_rerun_skips_finished_stages() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("run.toml"),
        "seed = 4\nmethods = \"k0,k1,concat\"\n[synthetic]\ncommunities = 2\nauthors_per_community = 30\neval_fraction = 0.2\n\
         [sample]\niterations = 2\nlength = 20\n[train]\ndim = 8\nepochs = 1\n[evaluate]\nrepeats = 2\n",
    )
    .unwrap();
    let args = ["pipeline", "--config", "run.toml", "--out-dir", "out"];
    let first = hopwalk(d, &args);
    ok(&first);
    let report = std::fs::read(d.join("out/report.kv")).unwrap();
    assert!(!String::from_utf8_lossy(&first.stderr).contains("[skip]"));

    let second = hopwalk(d, &args);
    ok(&second);
    let log = String::from_utf8_lossy(&second.stderr);
    assert!(!log.contains("[run]"), "{log}");
    assert_eq!(log.matches("[skip]").count(), 7);
    assert_eq!(std::fs::read(d.join("out/report.kv")).unwrap(), report);

    // a changed training setting reruns training and everything after it
    let third = hopwalk(d, &["pipeline", "--config", "run.toml", "--out-dir", "out", "--set", "train.dim=6"]);
    ok(&third);
    let log = String::from_utf8_lossy(&third.stderr);
    assert!(log.contains("[skip] ingest") && log.contains("[skip] sample k=0"));
    assert!(log.contains("[run]  train k=0") && log.contains("[run]  evaluate"));

    let forced = hopwalk(d, &["pipeline", "--config", "run.toml", "--out-dir", "out", "--force", "--set", "train.dim=6"]);
    ok(&forced);
    assert!(!String::from_utf8_lossy(&forced.stderr).contains("[skip]"));
}
