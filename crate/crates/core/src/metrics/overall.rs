use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub w_event: f64,
    pub w_geo: f64,
    pub w_temporal: f64,
}

/// Named dataset weight profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Tara,
    Wikitilo,
}

impl Profile {
    pub fn weights(self) -> WeightProfile {
        match self {
            Profile::Tara => WeightProfile {
                w_event: 0.4,
                w_geo: 0.3,
                w_temporal: 0.3,
            },
            Profile::Wikitilo => WeightProfile {
                w_event: 0.0,
                w_geo: 0.5,
                w_temporal: 0.5,
            },
        }
    }

    pub fn has_event(self) -> bool {
        self.weights().w_event > 0.0
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Tara => "tara",
            Profile::Wikitilo => "wikitilo",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tara" => Ok(Profile::Tara),
            "wikitilo" => Ok(Profile::Wikitilo),
            other => Err(format!(
                "unknown profile '{other}' (expected tara or wikitilo)"
            )),
        }
    }
}

pub fn overall_score(
    es: Option<f64>,
    gs: f64,
    ts: f64,
    profile: &WeightProfile,
) -> Result<f64, MetricError> {
    let event_part = match (es, profile.w_event > 0.0) {
        (Some(es), true) => profile.w_event * es,
        (None, false) => 0.0,
        _ => {
            return Err(MetricError::ProfileMismatch {
                w_event: profile.w_event,
            })
        }
    };
    Ok(event_part + profile.w_geo * gs + profile.w_temporal * ts)
}
