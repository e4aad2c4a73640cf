//! The command layer: dataset ingestion, pipeline runs with manifests,
//! scoring, run comparison and report tables. Every file is written
//! atomically (temp file, then rename).

mod compare;
mod config;
mod ingest;
mod report;
mod run;
mod score;

pub use compare::{cmd_compare, CompareRow, CompareTable};
pub use config::{
    BackendKind, BackendSection, Config, EmbeddingKind, EmbeddingSection, MetricsSection,
};
pub use ingest::{cmd_ingest, load_dataset, DatasetLoad, Exclusion, IngestReport};
pub use report::{cmd_report, render_text, Report, ReportRow, ReportSection};
pub use run::{cmd_run, prompt_checksums, PredictionLine, RunOutcome};
pub use score::{cmd_score, read_scores, ScoreOutcome, SummaryFile};

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error(
        "run aborted: {exhausted} of {total} records exhausted the backend (limit {limit:.0}%)"
    )]
    Aborted {
        exhausted: usize,
        total: usize,
        limit: f64,
    },
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
}

impl HarnessError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Writes via a sibling temp file and a rename, so readers never see a
/// partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let write = || -> io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        HarnessError::io(path, e)
    })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| HarnessError::Input(e.to_string()))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&serde_json::to_string(r).map_err(|e| HarnessError::Input(e.to_string()))?);
        text.push('\n');
    }
    atomic_write(path, text.as_bytes())
}

pub fn read_to_string(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String, HarnessError> {
    Ok(sha256_hex(
        &fs::read(path).map_err(|e| HarnessError::io(path, e))?,
    ))
}
