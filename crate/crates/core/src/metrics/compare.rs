use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::{MetricError, ScoreCard};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    Temporal,
    Geo,
    Event,
}

impl Component {
    pub fn code(self) -> &'static str {
        match self {
            Component::Temporal => "TS",
            Component::Geo => "GS",
            Component::Event => "ES",
        }
    }

    fn value(self, card: &ScoreCard) -> Option<f64> {
        match self {
            Component::Temporal => Some(card.temporal_score),
            Component::Geo => Some(card.geo_score),
            Component::Event => card.event_score,
        }
    }
}

/// A non-empty set of components, kept in TS, GS, ES order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Combo(Vec<Component>);

impl Combo {
    pub fn new(components: &[Component]) -> Option<Combo> {
        let mut v = components.to_vec();
        v.sort();
        v.dedup();
        (!v.is_empty()).then_some(Combo(v))
    }

    pub fn components(&self) -> &[Component] {
        &self.0
    }

    pub fn needs_event(&self) -> bool {
        self.0.contains(&Component::Event)
    }

    /// The seven combinations in table order.
    pub fn all() -> Vec<Combo> {
        use Component::*;
        [
            &[Temporal][..],
            &[Geo],
            &[Event],
            &[Temporal, Geo],
            &[Temporal, Event],
            &[Geo, Event],
            &[Temporal, Geo, Event],
        ]
        .iter()
        .map(|c| Combo(c.to_vec()))
        .collect()
    }

    /// The combinations that do not involve the event score.
    pub fn without_event() -> Vec<Combo> {
        Combo::all()
            .into_iter()
            .filter(|c| !c.needs_event())
            .collect()
    }

    fn value(&self, card: &ScoreCard) -> Option<f64> {
        let mut sum = 0.0;
        for c in &self.0 {
            sum += c.value(card)?;
        }
        Some(sum / self.0.len() as f64)
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 3 {
            return f.write_str("All");
        }
        let codes: Vec<&str> = self.0.iter().map(|c| c.code()).collect();
        f.write_str(&codes.join("+"))
    }
}

impl FromStr for Combo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Combo(vec![
                Component::Temporal,
                Component::Geo,
                Component::Event,
            ]));
        }
        let mut parts = Vec::new();
        for p in s.split('+') {
            parts.push(match p.trim().to_ascii_uppercase().as_str() {
                "TS" => Component::Temporal,
                "GS" => Component::Geo,
                "ES" => Component::Event,
                other => {
                    return Err(format!(
                        "unknown component '{other}' (expected TS, GS, ES or All)"
                    ))
                }
            });
        }
        Combo::new(&parts).ok_or_else(|| "empty combo".to_string())
    }
}

/// Percentage of samples where `a` beats `b` minus the percentage where `b`
/// beats `a`, on the unweighted mean of the combo's components. Ties count
/// for neither side.
pub fn net_error_change(
    a: &[ScoreCard],
    b: &[ScoreCard],
    combo: &Combo,
) -> Result<f64, MetricError> {
    let by_id: HashMap<&str, &ScoreCard> = b.iter().map(|c| (c.image_id.as_str(), c)).collect();
    if by_id.len() != b.len() || a.len() != b.len() {
        return Err(MetricError::MisalignedRuns(format!(
            "{} vs {} cards",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(MetricError::EmptyRun);
    }
    let (mut f1, mut f2) = (0usize, 0usize);
    for ca in a {
        let cb = by_id.get(ca.image_id.as_str()).ok_or_else(|| {
            MetricError::MisalignedRuns(format!("'{}' only in the first run", ca.image_id))
        })?;
        let missing = || MetricError::EventScoresMissing(combo.to_string());
        let va = combo.value(ca).ok_or_else(missing)?;
        let vb = combo.value(cb).ok_or_else(missing)?;
        if va > vb {
            f1 += 1;
        } else if vb > va {
            f2 += 1;
        }
    }
    Ok((f1 as f64 - f2 as f64) / a.len() as f64 * 100.0)
}
