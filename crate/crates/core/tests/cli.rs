mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{inauguration, synthetic};

fn bin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_getreason"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_flow_on_inauguration_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = inauguration().join("dataset.jsonl");
    let fx = inauguration().join("mock.jsonl");
    let o = bin(tmp.path(), &["ingest", "--dataset", s(&ds)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("utilized 1"));

    let o = bin(
        tmp.path(),
        &[
            "run",
            "--dataset",
            s(&ds),
            "--fixtures",
            s(&fx),
            "--run-id",
            "b",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let preds = tmp.path().join("runs/b/predictions.jsonl");
    let o = bin(
        tmp.path(),
        &["score", "--dataset", s(&ds), "--predictions", s(&preds)],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.contains("geo 100.0 temp 100.0 event 78.8 overall 91.5"),
        "{stdout}"
    );

    let scores = tmp.path().join("runs/b/scores.jsonl");
    let o = bin(
        tmp.path(),
        &["compare", "--a", s(&scores), "--b", s(&scores)],
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("All"));

    let summary = tmp.path().join("runs/b/summary.json");
    let o = bin(tmp.path(), &["report", s(&summary), "--label", "Ours"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("Ours"));
}

#[test]
fn warnings_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = synthetic().join("dataset.jsonl");
    let fx = synthetic().join("mock.jsonl");
    let o = bin(
        tmp.path(),
        &[
            "run",
            "--dataset",
            s(&ds),
            "--fixtures",
            s(&fx),
            "--run-id",
            "syn",
            "--mode",
            "direct",
        ],
    );
    assert!(code(&o) <= 1, "{}", String::from_utf8_lossy(&o.stderr));
    let preds = tmp.path().join("runs/syn/predictions.jsonl");
    let o = bin(
        tmp.path(),
        &["score", "--dataset", s(&ds), "--predictions", s(&preds)],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("gt-unresolvable"));
}

#[test]
fn errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin(tmp.path(), &["ingest", "--dataset", "missing.jsonl"]);
    assert_eq!(code(&o), 2);
    let o = bin(
        tmp.path(),
        &["run", "--dataset", s(&inauguration().join("dataset.jsonl"))],
    );
    assert_eq!(code(&o), 2, "mock backend without fixtures");
    assert!(String::from_utf8_lossy(&o.stderr).contains("fixtures"));
}

#[test]
fn config_file_paths_resolve_relative_to_it() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = common::copy_fixture("inauguration", tmp.path());
    fs::write(
        dir.join("run.toml"),
        "run_id = \"cfg\"\ndataset = \"dataset.jsonl\"\n\n[pipeline]\nmode = \"partial_cross\"\n\n[backend]\nkind = \"mock\"\nfixtures = \"mock.jsonl\"\n",
    )
    .unwrap();
    let o = bin(tmp.path(), &["run", "--config", s(&dir.join("run.toml"))]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(dir.join("runs/cfg/manifest.json")).unwrap();
    assert!(manifest.contains("partial_cross"));
}
