use std::path::Path;
use std::process::{Command, Output};

fn repvec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repvec"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = repvec(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn prepare(dir: &Path) {
    ok(dir, &["gen-corpus", "--n", "2000", "--seed", "7"]);
    ok(dir, &["condense"]);
    ok(dir, &["map"]);
}

#[test]
fn chain_produces_model_and_neighbours() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    ok(
        dir,
        &[
            "train",
            "--arch",
            "cbow",
            "--objective",
            "ns",
            "--window",
            "5",
            "--dim",
            "100",
            "--epochs",
            "2",
        ],
    );
    let model = std::fs::read_to_string(dir.join("model.txt")).unwrap();
    let header: Vec<&str> = model.lines().next().unwrap().split(' ').collect();
    assert_eq!(header.len(), 2);
    let v: usize = header[0].parse().unwrap();
    assert!(v > 0);
    assert_eq!(header[1], "100");
    assert_eq!(model.lines().count(), v + 1);

    let out = ok(dir, &["similar", "--word", "hemorrhage", "--k", "8"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    let scores: Vec<f64> = rows
        .iter()
        .map(|r| r.split('\t').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]), "{scores:?}");
    assert!(rows.iter().all(|r| r.split('\t').nth(1) != Some("hemorrhage")));

    for stage in ["gen-corpus", "condense", "map", "train", "similar"] {
        let log: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join("logs").join(format!("{stage}.json"))).unwrap())
                .unwrap();
        assert_eq!(log["stage"], stage);
    }
    let train_log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("logs/train.json")).unwrap()).unwrap();
    assert_eq!(train_log["seed"], 1);
    assert_eq!(train_log["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn stages_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        prepare(d);
        ok(d, &["train", "--dim", "20", "--epochs", "1"]);
    }
    for f in ["reports.jsonl", "condensed.jsonl", "mapped.jsonl", "model.txt"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn remapping_mapped_corpus_is_noop() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    prepare(dir);
    let mapped = dir.join("mapped.jsonl");
    let again = dir.join("again.jsonl");
    ok(
        dir,
        &[
            "map",
            "--input",
            mapped.to_str().unwrap(),
            "--output",
            again.to_str().unwrap(),
        ],
    );
    let first = std::fs::read(&mapped).unwrap();
    let again = std::fs::read(&again).unwrap();
    assert_eq!(first, again);
}

#[test]
fn missing_input_exits_one_and_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("absent.jsonl");
    let out = repvec(tmp.path(), &["condense", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.jsonl"));
}

#[test]
fn unknown_word_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("model.txt"), "2 2\na 1 0\nb 0 1\n").unwrap();
    let out = repvec(dir, &["similar", "--word", "zzz"]);
    assert_eq!(out.status.code(), Some(1));
    let out = ok(dir, &["--format", "json", "similar", "--word", "a", "--k", "1"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["word"], "b");
}

#[test]
fn stale_inputs_warn_and_fail_under_strict() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(dir, &["gen-corpus", "--n", "300", "--seed", "3"]);
    ok(
        dir,
        &["condense", "--min-term-frequency", "2", "--collocation-min-count", "10"],
    );
    let path = dir.join("condensed.jsonl");
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push('\n');
    std::fs::write(&path, text).unwrap();

    let out = repvec(dir, &["--strict", "map"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stale"));

    let out = repvec(dir, &["map"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("changed after stage condense"));
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("logs/map.json")).unwrap()).unwrap();
    assert_eq!(log["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn invalid_flag_values_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = repvec(tmp.path(), &["gen-corpus", "--proportions", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = repvec(
        tmp.path(),
        &["gen-corpus", "--n", "10", "--proportions", "0.5", "0.6", "0.1"],
    );
    assert_eq!(out.status.code(), Some(1));
}
