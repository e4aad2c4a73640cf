use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::normalize::render_temporal_field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalUnit {
    Century,
    Decade,
    Year,
    Month,
    Day,
}

impl TemporalUnit {
    pub const ALL: [TemporalUnit; 5] = [
        TemporalUnit::Century,
        TemporalUnit::Decade,
        TemporalUnit::Year,
        TemporalUnit::Month,
        TemporalUnit::Day,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TemporalUnit::Century => "century",
            TemporalUnit::Decade => "decade",
            TemporalUnit::Year => "year",
            TemporalUnit::Month => "month",
            TemporalUnit::Day => "day",
        }
    }
}

impl fmt::Display for TemporalUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Canonical temporal annotation. Decades are stored as their start year,
/// centuries as their ordinal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalValue {
    pub century: Option<i32>,
    pub decade: Option<i32>,
    pub year: Option<i32>,
    pub month: Option<i32>,
    pub day: Option<i32>,
}

impl TemporalValue {
    pub fn get(&self, unit: TemporalUnit) -> Option<i32> {
        match unit {
            TemporalUnit::Century => self.century,
            TemporalUnit::Decade => self.decade,
            TemporalUnit::Year => self.year,
            TemporalUnit::Month => self.month,
            TemporalUnit::Day => self.day,
        }
    }

    pub fn set(&mut self, unit: TemporalUnit, value: Option<i32>) {
        let slot = match unit {
            TemporalUnit::Century => &mut self.century,
            TemporalUnit::Decade => &mut self.decade,
            TemporalUnit::Year => &mut self.year,
            TemporalUnit::Month => &mut self.month,
            TemporalUnit::Day => &mut self.day,
        };
        *slot = value;
    }

    pub fn is_empty(&self) -> bool {
        TemporalUnit::ALL.iter().all(|u| self.get(*u).is_none())
    }

    /// Units populated in this value, in canonical order.
    pub fn present_units(&self) -> impl Iterator<Item = TemporalUnit> + '_ {
        TemporalUnit::ALL
            .into_iter()
            .filter(|u| self.get(*u).is_some())
    }

    /// Ingest-time consistency check between year and decade.
    pub fn consistency_warning(&self) -> Option<String> {
        match (self.year, self.decade) {
            (Some(y), Some(d)) if y.div_euclid(10) * 10 != d => {
                Some(format!("temporal: decade {d} does not contain year {y}"))
            }
            _ => None,
        }
    }

    fn write_wire(&self, obj: &mut Map<String, Value>) {
        for unit in TemporalUnit::ALL {
            let text = match self.get(unit) {
                Some(v) => render_temporal_field(v, unit),
                None => "NA".to_string(),
            };
            obj.insert(unit.key().to_string(), Value::String(text));
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoName {
    pub country: Option<String>,
    pub state_or_province: Option<String>,
    pub city: Option<String>,
}

impl GeoName {
    pub fn new(country: Option<&str>, state: Option<&str>, city: Option<&str>) -> Self {
        GeoName {
            country: country.map(str::to_string),
            state_or_province: state.map(str::to_string),
            city: city.map(str::to_string),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.country.is_none() && self.state_or_province.is_none() && self.city.is_none()
    }

    fn write_wire(&self, obj: &mut Map<String, Value>) {
        let na = |v: &Option<String>| Value::String(v.clone().unwrap_or_else(|| "NA".into()));
        obj.insert("country".into(), na(&self.country));
        obj.insert("state_or_province".into(), na(&self.state_or_province));
        obj.insert("city".into(), na(&self.city));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub temporal: TemporalValue,
    pub geo: GeoName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deductions: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub attribute: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub entity: String,
    pub attributes: Vec<Attribute>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relationship {
    pub relationship: String,
    pub reasoning: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub entities: Vec<Entity>,
    pub relationships: Vec<Relationship>,
}

impl SceneGraph {
    pub fn to_wire(&self) -> Value {
        let mut obj = Map::new();
        self.write_wire(&mut obj);
        Value::Object(obj)
    }

    fn write_wire(&self, obj: &mut Map<String, Value>) {
        let entities = self
            .entities
            .iter()
            .map(|e| {
                let attrs: Vec<Value> = e
                    .attributes
                    .iter()
                    .map(|a| json!({"attribute": a.attribute, "value": a.value}))
                    .collect();
                json!({"attributes": attrs, "entity": e.entity})
            })
            .collect();
        let relationships = self
            .relationships
            .iter()
            .map(|r| json!({"reasoning": r.reasoning, "relationship": r.relationship}))
            .collect();
        obj.insert("entities".into(), Value::Array(entities));
        obj.insert("relationships".into(), Value::Array(relationships));
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractIdea {
    pub idea: Option<String>,
    pub reasoning: Option<String>,
}

impl AbstractIdea {
    pub fn to_wire(&self) -> Value {
        let na = |v: &Option<String>| v.clone().unwrap_or_else(|| "NA".into());
        json!({"abstract_idea": {"idea": na(&self.idea), "reasoning": na(&self.reasoning)}})
    }
}

/// Scene graph with the abstract idea merged in.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedSceneGraph {
    pub graph: SceneGraph,
    pub abstract_idea: Option<String>,
    pub abstract_reasoning: Option<String>,
}

impl AugmentedSceneGraph {
    /// The graph object with `abstract_idea` appended as a bare string, the
    /// shape handed to the prompt and extraction agents.
    pub fn to_wire(&self) -> Value {
        let mut obj = Map::new();
        self.graph.write_wire(&mut obj);
        if let Some(idea) = &self.abstract_idea {
            obj.insert("abstract_idea".into(), Value::String(idea.clone()));
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPrompt {
    pub prompt: String,
    pub reasoning: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecialistPrompts {
    pub event_prompt: AgentPrompt,
    pub temporal_prompt: AgentPrompt,
    pub geo_prompt: AgentPrompt,
}

impl SpecialistPrompts {
    pub fn to_wire(&self) -> Value {
        let p = |a: &AgentPrompt| json!({"prompt": a.prompt, "reasoning": a.reasoning});
        json!({
            "global_event_specialist": p(&self.event_prompt),
            "spatial_specialist": p(&self.geo_prompt),
            "temporal_specialist": p(&self.temporal_prompt),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalPrediction {
    pub value: TemporalValue,
    pub time_of_day: Option<String>,
    pub reasoning: String,
}

impl TemporalPrediction {
    pub fn degraded() -> Self {
        TemporalPrediction {
            reasoning: "NA".into(),
            ..Default::default()
        }
    }

    pub fn to_wire(&self) -> Value {
        let mut obj = Map::new();
        self.value.write_wire(&mut obj);
        obj.insert(
            "time_of_day".into(),
            Value::String(self.time_of_day.clone().unwrap_or_else(|| "NA".into())),
        );
        obj.insert("reasoning".into(), Value::String(self.reasoning.clone()));
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeoPrediction {
    pub value: GeoName,
    pub reasoning: String,
}

impl GeoPrediction {
    pub fn degraded() -> Self {
        GeoPrediction {
            reasoning: "NA".into(),
            ..Default::default()
        }
    }

    pub fn to_wire(&self) -> Value {
        let mut obj = Map::new();
        self.value.write_wire(&mut obj);
        obj.insert("reasoning".into(), Value::String(self.reasoning.clone()));
        Value::Object(obj)
    }
}

/// A value and the reasoning behind it. An NA value is stored as "".
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueWithReasoning {
    pub value: String,
    pub reasoning: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventPrediction {
    pub event: ValueWithReasoning,
    pub background: ValueWithReasoning,
}

impl EventPrediction {
    pub fn degraded() -> Self {
        let na = ValueWithReasoning {
            value: String::new(),
            reasoning: "NA".into(),
        };
        EventPrediction {
            event: na.clone(),
            background: na,
        }
    }

    pub fn to_wire(&self) -> Value {
        let v = |x: &ValueWithReasoning| {
            let value = if x.value.is_empty() {
                "NA"
            } else {
                x.value.as_str()
            };
            json!({"reasoning": x.reasoning, "value": value})
        };
        json!({"background": v(&self.background), "event": v(&self.event)})
    }
}

/// The three specialist predictions for one image.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionBundle {
    pub event: EventPrediction,
    pub temporal: TemporalPrediction,
    pub geo: GeoPrediction,
}

impl PredictionBundle {
    pub fn degraded() -> Self {
        PredictionBundle {
            event: EventPrediction::degraded(),
            temporal: TemporalPrediction::degraded(),
            geo: GeoPrediction::degraded(),
        }
    }

    pub fn to_wire(&self) -> Value {
        json!({
            "event": self.event.to_wire(),
            "temporal": self.temporal.to_wire(),
            "geospatial": self.geo.to_wire(),
        })
    }
}
