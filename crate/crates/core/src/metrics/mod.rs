//! The GREAT metric family: event, geospatial, temporal and overall scores
//! per image, run aggregation, and net error change between runs.

mod aggregate;
mod compare;
mod event;
mod geo;
mod overall;
mod temporal;

pub use aggregate::{aggregate_run, round1, warning_kind, ComponentMeans, RunSummary};
pub use compare::{net_error_change, Combo, Component};
pub use event::{event_score, event_text};
pub use geo::{geo_score, haversine_km, score_from_distance, GeoConfig, GeoScore, GT_UNRESOLVABLE};
pub use overall::{overall_score, Profile, WeightProfile};
pub use temporal::{
    temporal_score, temporal_unit_score, TemporalConfig, UnitTolerances, UnitWeights,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingProvider};
use crate::gazetteer::Gazetteer;
use crate::schema::{GroundTruth, PredictionBundle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("ground truth has no temporal units")]
    EmptyGroundTruth,
    #[error("event score presence does not match the weight profile (w_event = {w_event})")]
    ProfileMismatch { w_event: f64 },
    #[error("cannot aggregate an empty run")]
    EmptyRun,
    #[error("runs are not aligned by image id: {0}")]
    MisalignedRuns(String),
    #[error("combo {0} needs event scores, but at least one run has none")]
    EventScoresMissing(String),
    #[error("ground truth has no event or background text")]
    MissingEventTruth,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Per-image scores. Component scores lie in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCard {
    pub image_id: String,
    pub event_score: Option<f64>,
    pub geo_score: f64,
    pub temporal_score: f64,
    pub overall: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Everything needed to score predictions, borrowed for the duration of a
/// scoring pass.
pub struct ScoringContext<'a> {
    pub gazetteer: &'a Gazetteer,
    pub embedder: &'a dyn EmbeddingProvider,
    pub geo: GeoConfig,
    pub temporal: TemporalConfig,
    pub profile: WeightProfile,
}

pub const TEMPORAL_GT_EMPTY: &str = "temporal-gt-empty";

/// Scores one prediction bundle against its ground truth.
pub fn score_card(
    image_id: &str,
    pred: &PredictionBundle,
    gt: &GroundTruth,
    ctx: &ScoringContext<'_>,
) -> Result<ScoreCard, MetricError> {
    let mut warnings = Vec::new();
    let geo = geo_score(&pred.geo.value, &gt.geo, ctx.gazetteer, &ctx.geo);
    warnings.extend(geo.warnings);
    let temporal = match temporal_score(&pred.temporal.value, &gt.temporal, &ctx.temporal) {
        Ok(ts) => ts,
        Err(MetricError::EmptyGroundTruth) => {
            warnings.push(TEMPORAL_GT_EMPTY.to_string());
            1.0
        }
        Err(e) => return Err(e),
    };
    let event = if ctx.profile.w_event > 0.0 {
        if gt.event.is_none() && gt.background.is_none() {
            return Err(MetricError::MissingEventTruth);
        }
        Some(event_score(
            &pred.event,
            gt.event.as_deref().unwrap_or(""),
            gt.background.as_deref().unwrap_or(""),
            ctx.embedder,
        )?)
    } else {
        None
    };
    let overall = overall_score(event, geo.score, temporal, &ctx.profile)?;
    Ok(ScoreCard {
        image_id: image_id.to_string(),
        event_score: event,
        geo_score: geo.score,
        temporal_score: temporal,
        overall,
        warnings,
    })
}
