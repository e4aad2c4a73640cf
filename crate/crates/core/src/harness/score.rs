use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::Config;
use super::ingest::load_dataset;
use super::run::PredictionLine;
use super::{file_sha256, read_to_string, sha256_hex, write_json, write_jsonl, HarnessError};
use crate::gazetteer::BUNDLED_CSV;
use crate::metrics::{
    aggregate_run, score_card, MetricError, Profile, RunSummary, ScoreCard, ScoringContext,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedScore {
    pub image_id: String,
    pub reason: String,
}

/// `summary.json`: the run summary plus what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub label: String,
    pub profile: Profile,
    pub n_predictions: usize,
    pub n_scored: usize,
    pub excluded: Vec<ExcludedScore>,
    pub summary: RunSummary,
    pub config: Value,
}

#[derive(Debug, Clone)]
pub struct ScoreOutcome {
    pub scores_path: PathBuf,
    pub summary_path: PathBuf,
    pub summary: SummaryFile,
    pub warnings: Vec<String>,
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionLine>, HarnessError> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| HarnessError::Input(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreCard>, HarnessError> {
    read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| HarnessError::Input(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

/// Scores a predictions file against the dataset's ground truth and writes
/// `scores.jsonl` and `summary.json` into `out_dir`.
pub fn cmd_score(
    cfg: &Config,
    predictions_path: &Path,
    dataset_path: &Path,
    out_dir: &Path,
    label: &str,
) -> Result<ScoreOutcome, HarnessError> {
    let predictions = read_predictions(predictions_path)?;
    let dataset = load_dataset(dataset_path)?;
    let truth: HashMap<&str, _> = dataset
        .records
        .iter()
        .filter_map(|r| r.ground_truth.as_ref().map(|gt| (r.id.as_str(), gt)))
        .collect();
    let gazetteer = cfg.build_gazetteer()?;
    let embedder = cfg.build_embedder()?;
    let ctx = ScoringContext {
        gazetteer: &gazetteer,
        embedder: embedder.as_ref(),
        geo: cfg.metrics.geo,
        temporal: cfg.metrics.temporal,
        profile: cfg.profile.weights(),
    };

    let mut cards = Vec::new();
    let mut excluded = Vec::new();
    for p in &predictions {
        let Some(gt) = truth.get(p.image_id.as_str()) else {
            excluded.push(ExcludedScore {
                image_id: p.image_id.clone(),
                reason: "missing ground truth".into(),
            });
            continue;
        };
        match score_card(&p.image_id, &p.prediction, gt, &ctx) {
            Ok(card) => cards.push(card),
            Err(MetricError::MissingEventTruth) => excluded.push(ExcludedScore {
                image_id: p.image_id.clone(),
                reason: MetricError::MissingEventTruth.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    let summary = aggregate_run(&cards)?;
    let gazetteer_sha = match &cfg.gazetteer {
        Some(p) => file_sha256(p)?,
        None => sha256_hex(BUNDLED_CSV.as_bytes()),
    };
    let file = SummaryFile {
        label: label.to_string(),
        profile: cfg.profile,
        n_predictions: predictions.len(),
        n_scored: cards.len(),
        excluded,
        summary,
        config: json!({
            "weights": cfg.profile.weights(),
            "geo": cfg.metrics.geo,
            "temporal": cfg.metrics.temporal,
            "embedder": {"name": embedder.name(), "dim": embedder.dim()},
            "gazetteer_sha256": gazetteer_sha,
            "predictions_sha256": file_sha256(predictions_path)?,
            "dataset_sha256": file_sha256(dataset_path)?,
            "combo_aggregation": "unweighted mean",
        }),
    };
    let scores_path = out_dir.join("scores.jsonl");
    let summary_path = out_dir.join("summary.json");
    write_jsonl(&scores_path, &cards)?;
    write_json(&summary_path, &file)?;

    let mut warnings: Vec<String> = file
        .excluded
        .iter()
        .map(|e| format!("{}: excluded: {}", e.image_id, e.reason))
        .collect();
    warnings.extend(cards.iter().flat_map(|c| {
        c.warnings
            .iter()
            .map(move |w| format!("{}: {w}", c.image_id))
    }));
    Ok(ScoreOutcome {
        scores_path,
        summary_path,
        summary: file,
        warnings,
    })
}
