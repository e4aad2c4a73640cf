use std::path::Path;

use serde::{Deserialize, Serialize};

use super::score::read_scores;
use super::HarnessError;
use crate::metrics::{net_error_change, Combo, MetricError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub combo: String,
    pub net_change: f64,
}

/// Net error change of run A over run B for each combination, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub n_samples: usize,
    pub rows: Vec<CompareRow>,
    pub aggregation: String,
}

impl CompareTable {
    pub fn render(&self) -> String {
        let head: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{:>7}", r.combo))
            .collect();
        let vals: Vec<String> = self
            .rows
            .iter()
            .map(|r| format!("{:>7.1}", r.net_change))
            .collect();
        format!(
            "Net error change (%), N = {} ({} of selected components)\n{}\n{}\n",
            self.n_samples,
            self.aggregation,
            head.join(" "),
            vals.join(" ")
        )
    }
}

/// `combos` empty means all seven when both runs carry event scores, and
/// the four event-free ones otherwise.
pub fn cmd_compare(
    scores_a: &Path,
    scores_b: &Path,
    combos: &[Combo],
) -> Result<CompareTable, HarnessError> {
    let a = read_scores(scores_a)?;
    let b = read_scores(scores_b)?;
    let combos = if combos.is_empty() {
        let events = a.iter().chain(&b).all(|c| c.event_score.is_some());
        if events {
            Combo::all()
        } else {
            Combo::without_event()
        }
    } else {
        combos.to_vec()
    };
    let mut rows = Vec::new();
    for c in &combos {
        let nc = net_error_change(&a, &b, c).map_err(|e| match e {
            MetricError::EventScoresMissing(_) => HarnessError::Input(format!(
                "combo {c} needs event scores; at least one run was scored without them (wikitilo profile?)"
            )),
            other => other.into(),
        })?;
        rows.push(CompareRow {
            combo: c.to_string(),
            net_change: nc,
        });
    }
    Ok(CompareTable {
        n_samples: a.len(),
        rows,
        aggregation: "unweighted mean".into(),
    })
}
