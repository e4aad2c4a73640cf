use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{BackendKind, Config};
use super::ingest::load_dataset;
use super::{file_sha256, sha256_hex, write_json, write_jsonl, HarnessError};
use crate::agents::{run_pipeline, PipelineResult, Template};
use crate::backend::{CallContext, CaptureLog, Limiter, Stage};
use crate::gazetteer::BUNDLED_CSV;
use crate::schema::{ImageRecord, PredictionBundle};

/// One line of `predictions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLine {
    pub image_id: String,
    pub prediction: PredictionBundle,
    #[serde(default)]
    pub degraded_stages: Vec<Stage>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run_id: String,
    pub run_dir: PathBuf,
    pub n_records: usize,
    pub n_completed: usize,
    pub n_degraded: usize,
    pub warnings: Vec<String>,
}

pub fn prompt_checksums() -> BTreeMap<&'static str, String> {
    Template::ALL
        .iter()
        .map(|t| (t.file_name(), sha256_hex(t.text().as_bytes())))
        .collect()
}

fn safe_name(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn manifest_body(cfg: &Config, dataset: &Path) -> Result<Value, HarnessError> {
    let fixtures = match (cfg.backend.kind, &cfg.backend.fixtures) {
        (BackendKind::Mock, Some(p)) => {
            Some(json!({"path": p.display().to_string(), "sha256": file_sha256(p)?}))
        }
        _ => None,
    };
    let gazetteer = match &cfg.gazetteer {
        Some(p) => json!({"path": p.display().to_string(), "sha256": file_sha256(p)?}),
        None => json!({"path": "bundled", "sha256": sha256_hex(BUNDLED_CSV.as_bytes())}),
    };
    let backend_params = cfg.build_backend()?.params();
    Ok(json!({
        "code_version": env!("CARGO_PKG_VERSION"),
        "dataset": {"path": dataset.display().to_string(), "sha256": file_sha256(dataset)?},
        "profile": cfg.profile,
        "pipeline": cfg.pipeline,
        "backend": {
            "kind": cfg.backend.kind,
            "params": backend_params,
            "fixtures": fixtures,
            "max_parse_retries": cfg.backend.max_parse_retries,
            "max_in_flight": cfg.backend.max_in_flight,
        },
        "embedding": cfg.embedding,
        "gazetteer": gazetteer,
        "metrics": cfg.metrics,
        "prompt_checksums": prompt_checksums(),
        "workers": cfg.workers,
        "abort_fraction": cfg.abort_fraction,
    }))
}

fn write_artifacts(
    dir: &Path,
    r: &PipelineResult,
    cross: bool,
    baseline: bool,
) -> Result<(), HarnessError> {
    if !baseline {
        write_json(
            &dir.join("scene_graph.json"),
            &r.scene_graph.graph.to_wire(),
        )?;
        write_json(&dir.join("abstract.json"), &r.abstract_idea().to_wire())?;
        write_json(&dir.join("prompts.json"), &r.prompts.to_wire())?;
    }
    let bundle = |sub: &str, b: &PredictionBundle| -> Result<(), HarnessError> {
        write_json(&dir.join(sub).join("event.json"), &b.event.to_wire())?;
        write_json(&dir.join(sub).join("temporal.json"), &b.temporal.to_wire())?;
        write_json(&dir.join(sub).join("geospatial.json"), &b.geo.to_wire())
    };
    bundle("direct", &r.direct)?;
    if cross {
        bundle("final", &r.final_)?;
    }
    write_json(
        &dir.join("status.json"),
        &json!({"degraded_stages": r.degraded_stages, "warnings": r.warnings, "calls": r.calls}),
    )
}

fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Runs the pipeline over every dataset record with a bounded worker pool
/// and writes the run directory: `manifest.json`, `predictions.jsonl`,
/// `artifacts/<id>/..`, `capture.jsonl` and `run_log.json`.
pub fn cmd_run(cfg: &Config) -> Result<RunOutcome, HarnessError> {
    let started = now_ms();
    let dataset = cfg.dataset_path()?;
    let load = load_dataset(dataset)?;
    let mut warnings: Vec<String> = load
        .exclusions
        .iter()
        .map(|e| format!("dataset line {}: excluded: {}", e.line, e.reason))
        .collect();
    warnings.extend(load.warnings.iter().cloned());

    let body = manifest_body(cfg, dataset)?;
    let run_id = match &cfg.run_id {
        Some(id) => id.clone(),
        None => format!("run-{}", &sha256_hex(body.to_string().as_bytes())[..12]),
    };
    let mut manifest = json!({"run_id": run_id});
    manifest
        .as_object_mut()
        .expect("object")
        .extend(body.as_object().expect("object").clone());

    let run_dir = cfg.runs_dir.join(&run_id);
    let artifacts = run_dir.join("artifacts");
    if artifacts.exists() {
        fs::remove_dir_all(&artifacts).map_err(|e| HarnessError::io(&artifacts, e))?;
    }
    fs::create_dir_all(&run_dir).map_err(|e| HarnessError::io(&run_dir, e))?;
    write_json(&run_dir.join("manifest.json"), &manifest)?;
    let capture_path = run_dir.join("capture.jsonl");
    if capture_path.exists() {
        fs::remove_file(&capture_path).map_err(|e| HarnessError::io(&capture_path, e))?;
    }
    let capture =
        CaptureLog::create(&capture_path).map_err(|e| HarnessError::io(&capture_path, e))?;

    let backend = cfg.build_backend()?;
    let limiter = Limiter::new(cfg.backend.max_in_flight);
    let ctx = CallContext {
        backend: backend.as_ref(),
        capture: Some(&capture),
        limiter: Some(&limiter),
        max_parse_retries: cfg.backend.max_parse_retries,
    };
    let cross = !matches!(cfg.pipeline.mode, crate::agents::Mode::Direct)
        && !cfg.pipeline.mode.is_baseline();
    let baseline = cfg.pipeline.mode.is_baseline();

    let records: &[ImageRecord] = &load.records;
    let n = records.len();
    let next = AtomicUsize::new(0);
    let exhausted = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Result<PipelineResult, String>>>> = Mutex::new(vec![None; n]);
    let write_errors: Mutex<Vec<HarnessError>> = Mutex::new(Vec::new());

    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1).min(n.max(1)) {
            s.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let rec = &records[i];
                let res = run_pipeline(rec, &cfg.pipeline, &ctx).map_err(|e| e.to_string());
                if let Ok(r) = &res {
                    if let Err(e) =
                        write_artifacts(&artifacts.join(safe_name(&rec.id)), r, cross, baseline)
                    {
                        write_errors
                            .lock()
                            .unwrap_or_else(|e| e.into_inner())
                            .push(e);
                    }
                    if r.backend_exhausted {
                        let c = exhausted.fetch_add(1, Ordering::SeqCst) + 1;
                        if c as f64 > cfg.abort_fraction * n as f64 {
                            abort.store(true, Ordering::SeqCst);
                        }
                    }
                }
                results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(res);
            });
        }
    });

    if let Some(e) = write_errors
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .next()
    {
        return Err(e);
    }
    let results = results.into_inner().unwrap_or_else(|e| e.into_inner());
    let mut predictions = Vec::new();
    let mut log_records = Vec::new();
    let mut n_degraded = 0;
    for (rec, res) in records.iter().zip(&results) {
        match res {
            Some(Ok(r)) => {
                if !r.degraded_stages.is_empty() {
                    n_degraded += 1;
                    let names: Vec<&str> = r.degraded_stages.iter().map(|s| s.name()).collect();
                    warnings.push(format!("{}: degraded stages {}", rec.id, names.join(", ")));
                }
                predictions.push(PredictionLine {
                    image_id: r.image_id.clone(),
                    prediction: r.final_.clone(),
                    degraded_stages: r.degraded_stages.clone(),
                });
                log_records.push(json!({
                    "image_id": rec.id, "status": "ok", "degraded_stages": r.degraded_stages, "calls": r.calls,
                }));
            }
            Some(Err(e)) => {
                warnings.push(format!("{}: failed: {e}", rec.id));
                log_records.push(json!({"image_id": rec.id, "status": "failed", "error": e}));
            }
            None => log_records.push(json!({"image_id": rec.id, "status": "skipped"})),
        }
    }
    let aborted = abort.load(Ordering::SeqCst);
    write_json(
        &run_dir.join("run_log.json"),
        &json!({
            "run_id": run_id,
            "started_ms": started,
            "finished_ms": now_ms(),
            "aborted": aborted,
            "records": log_records,
        }),
    )?;
    if aborted {
        return Err(HarnessError::Aborted {
            exhausted: exhausted.load(Ordering::SeqCst),
            total: n,
            limit: cfg.abort_fraction * 100.0,
        });
    }
    write_jsonl(&run_dir.join("predictions.jsonl"), &predictions)?;
    Ok(RunOutcome {
        run_id,
        run_dir,
        n_records: n,
        n_completed: predictions.len(),
        n_degraded,
        warnings,
    })
}
