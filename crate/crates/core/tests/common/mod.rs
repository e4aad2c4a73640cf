#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use getreason::backend::{MockBackend, MockEntry, Stage};
use getreason::schema::{parse_record, ImageRecord};

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn records(dir: &Path) -> Vec<ImageRecord> {
    fs::read_to_string(dir.join("dataset.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_record(l, dir).unwrap().record)
        .collect()
}

pub fn record(dir: &Path, id: &str) -> ImageRecord {
    records(dir).into_iter().find(|r| r.id == id).unwrap()
}

pub fn entries(dir: &Path) -> Vec<MockEntry> {
    fs::read_to_string(dir.join("mock.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

pub fn mock(dir: &Path) -> MockBackend {
    MockBackend::from_entries(entries(dir))
}

/// The fixture set with every reply for `stage` dropped.
pub fn mock_without(dir: &Path, stage: Stage) -> MockBackend {
    MockBackend::from_entries(entries(dir).into_iter().filter(|e| e.stage != stage))
}

/// The fixture set with every reply for `stage` replaced by `text`.
pub fn mock_replacing(dir: &Path, stage: Stage, text: &str) -> MockBackend {
    MockBackend::from_entries(entries(dir).into_iter().map(|mut e| {
        if e.stage == stage {
            e.response_text = text.to_string();
        }
        e
    }))
}

pub fn inauguration() -> PathBuf {
    fixture_dir("inauguration")
}

pub fn synthetic() -> PathBuf {
    fixture_dir("synthetic")
}

/// Copies a fixture directory so tests can write next to it.
pub fn copy_fixture(name: &str, to: &Path) -> PathBuf {
    let src = fixture_dir(name);
    let dst = to.join(name);
    fs::create_dir_all(&dst).unwrap();
    for e in fs::read_dir(&src).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), dst.join(e.file_name())).unwrap();
    }
    dst
}

/// Mock-backed config over a fixture directory, writing runs under `runs_dir`.
pub fn config(dir: &Path, runs_dir: &Path) -> getreason::harness::Config {
    let mut cfg = getreason::harness::Config {
        dataset: Some(dir.join("dataset.jsonl")),
        runs_dir: runs_dir.to_path_buf(),
        ..Default::default()
    };
    cfg.backend.fixtures = Some(dir.join("mock.jsonl"));
    cfg
}

/// Every file under `root`, relative path to bytes.
pub fn tree(root: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut std::collections::BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// `tree` minus the files that carry wall-clock times.
pub fn deterministic_tree(root: &Path) -> std::collections::BTreeMap<PathBuf, Vec<u8>> {
    let mut t = tree(root);
    t.remove(Path::new("capture.jsonl"));
    t.remove(Path::new("run_log.json"));
    t
}
