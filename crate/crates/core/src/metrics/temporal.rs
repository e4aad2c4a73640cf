use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::schema::{TemporalUnit, TemporalValue};

/// Per-unit tolerance thresholds. Decade and year are in years, month in
/// months, day in days. Century has no tolerance: it scores by exact match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnitTolerances {
    pub decade: f64,
    pub year: f64,
    pub month: f64,
    pub day: f64,
}

impl Default for UnitTolerances {
    fn default() -> Self {
        UnitTolerances {
            decade: 50.0,
            year: 5.0,
            month: 6.0,
            day: 15.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UnitWeights {
    pub century: f64,
    pub decade: f64,
    pub year: f64,
    pub month: f64,
    pub day: f64,
}

impl Default for UnitWeights {
    fn default() -> Self {
        UnitWeights {
            century: 1.0,
            decade: 1.0,
            year: 1.25,
            month: 1.5,
            day: 1.5,
        }
    }
}

impl UnitWeights {
    pub fn get(&self, unit: TemporalUnit) -> f64 {
        match unit {
            TemporalUnit::Century => self.century,
            TemporalUnit::Decade => self.decade,
            TemporalUnit::Year => self.year,
            TemporalUnit::Month => self.month,
            TemporalUnit::Day => self.day,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemporalConfig {
    pub tolerances: UnitTolerances,
    pub weights: UnitWeights,
}

pub fn temporal_unit_score(
    unit: TemporalUnit,
    gt: i32,
    pred: Option<i32>,
    cfg: &TemporalConfig,
) -> f64 {
    let Some(pred) = pred else {
        return 0.0;
    };
    let tolerance = match unit {
        TemporalUnit::Century => return if gt == pred { 1.0 } else { 0.0 },
        TemporalUnit::Decade => cfg.tolerances.decade,
        TemporalUnit::Year => cfg.tolerances.year,
        TemporalUnit::Month => cfg.tolerances.month,
        TemporalUnit::Day => cfg.tolerances.day,
    };
    let diff = (f64::from(gt) - f64::from(pred)).abs();
    (1.0 - diff / tolerance).max(0.0)
}

/// Weighted mean of unit scores over the units present in the ground truth.
pub fn temporal_score(
    pred: &TemporalValue,
    gt: &TemporalValue,
    cfg: &TemporalConfig,
) -> Result<f64, MetricError> {
    let (num, den) = gt.present_units().fold((0.0, 0.0), |(num, den), unit| {
        let w = cfg.weights.get(unit);
        let gt_u = gt.get(unit).expect("present unit");
        (
            num + w * temporal_unit_score(unit, gt_u, pred.get(unit), cfg),
            den + w,
        )
    });
    if den == 0.0 {
        return Err(MetricError::EmptyGroundTruth);
    }
    Ok(num / den)
}
