use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MetricError, ScoreCard};

/// Rounds half away from zero to one decimal. The value is first snapped to
/// nine decimals so representation noise (60.349999..) cannot flip a tie.
pub fn round1(x: f64) -> f64 {
    let snapped = (x * 10.0 * 1e9).round() / 1e9;
    snapped.round() / 10.0
}

/// Component means as percentages at one decimal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentMeans {
    pub event: Option<f64>,
    pub geo: f64,
    pub temporal: f64,
    pub overall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_images: usize,
    pub means: ComponentMeans,
    /// Warning counts keyed by kind, the text before the first ':'.
    pub warning_counts: BTreeMap<String, usize>,
}

pub fn warning_kind(w: &str) -> &str {
    w.split(':').next().unwrap_or(w).trim()
}

pub fn aggregate_run(cards: &[ScoreCard]) -> Result<RunSummary, MetricError> {
    if cards.is_empty() {
        return Err(MetricError::EmptyRun);
    }
    let n = cards.len() as f64;
    let mean = |f: &dyn Fn(&ScoreCard) -> f64| round1(cards.iter().map(f).sum::<f64>() / n * 100.0);
    let event = if cards.iter().all(|c| c.event_score.is_some()) {
        Some(mean(&|c| c.event_score.unwrap_or(0.0)))
    } else {
        None
    };
    let mut warning_counts = BTreeMap::new();
    for w in cards.iter().flat_map(|c| &c.warnings) {
        *warning_counts
            .entry(warning_kind(w).to_string())
            .or_insert(0) += 1;
    }
    Ok(RunSummary {
        n_images: cards.len(),
        means: ComponentMeans {
            event,
            geo: mean(&|c| c.geo_score),
            temporal: mean(&|c| c.temporal_score),
            overall: mean(&|c| c.overall),
        },
        warning_counts,
    })
}
