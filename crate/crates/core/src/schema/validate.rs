use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::normalize::{is_na_sentinel, normalize_geo_field, normalize_temporal_field};
use super::types::*;
use super::SchemaError;

/// Wire schema an agent payload is expected to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    SceneGraph,
    Abstract,
    Prompts,
    Temporal,
    Geo,
    Event,
    /// Single-call baselines returning all three predictions at once.
    Combined,
}

impl Schema {
    pub fn name(self) -> &'static str {
        match self {
            Schema::SceneGraph => "scene_graph",
            Schema::Abstract => "abstract",
            Schema::Prompts => "prompts",
            Schema::Temporal => "temporal",
            Schema::Geo => "geo",
            Schema::Event => "event",
            Schema::Combined => "combined",
        }
    }

    fn marker_keys(self) -> &'static [&'static str] {
        match self {
            Schema::SceneGraph => &["entities", "relationships"],
            Schema::Abstract => &["abstract_idea", "idea"],
            Schema::Prompts => &[
                "global_event_specialist",
                "temporal_specialist",
                "spatial_specialist",
                "geospatial_specialist",
            ],
            Schema::Temporal => &["century", "decade", "year", "month", "day"],
            Schema::Geo => &["country", "state_or_province", "city"],
            Schema::Event => &["event", "background"],
            Schema::Combined => &["temporal", "geospatial", "geo", "event", "year", "country"],
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    SceneGraph(SceneGraph),
    Abstract(AbstractIdea),
    Prompts(SpecialistPrompts),
    Temporal(TemporalPrediction),
    Geo(GeoPrediction),
    Event(EventPrediction),
    Combined(PredictionBundle),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub record: Payload,
    pub warnings: Vec<String>,
}

/// Maps a parsed payload onto the domain type for `schema`. Unknown keys
/// are ignored; missing keys become absent values with a warning. Only a
/// non-object payload is an error.
pub fn validate_payload(payload: &Value, schema: Schema) -> Result<Validated, SchemaError> {
    let obj = payload.as_object().ok_or(SchemaError::SchemaMismatch {
        schema,
        found: json_kind(payload),
    })?;
    let obj = unwrap_response(obj, schema);
    let mut w = Vec::new();
    let record = match schema {
        Schema::SceneGraph => Payload::SceneGraph(scene_graph(obj, &mut w)),
        Schema::Abstract => Payload::Abstract(abstract_idea(obj, &mut w)),
        Schema::Prompts => Payload::Prompts(prompts(obj, &mut w)),
        Schema::Temporal => Payload::Temporal(temporal(obj, &mut w)),
        Schema::Geo => Payload::Geo(geo(obj, &mut w)),
        Schema::Event => Payload::Event(event(obj, &mut w)),
        Schema::Combined => Payload::Combined(combined(obj, &mut w)),
    };
    Ok(Validated {
        record,
        warnings: w,
    })
}

fn json_kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

/// Batch outputs wrap the payload as `{"id": .., "response": {..}}`.
fn unwrap_response(obj: &Map<String, Value>, schema: Schema) -> &Map<String, Value> {
    let has_marker = schema.marker_keys().iter().any(|k| get(obj, k).is_some());
    match get(obj, "response").and_then(Value::as_object) {
        Some(inner) if !has_marker => inner,
        _ => obj,
    }
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    obj.get(key).or_else(|| {
        obj.iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v)
    })
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn text_field(obj: &Map<String, Value>, key: &str) -> Option<String> {
    get(obj, key).and_then(scalar_text)
}

fn reasoning(obj: &Map<String, Value>) -> String {
    text_field(obj, "reasoning").unwrap_or_default()
}

fn scene_graph(obj: &Map<String, Value>, w: &mut Vec<String>) -> SceneGraph {
    let mut graph = SceneGraph::default();
    match get(obj, "entities").and_then(Value::as_array) {
        Some(items) => {
            for item in items.iter().filter_map(Value::as_object) {
                let Some(name) = text_field(item, "entity") else {
                    w.push("scene_graph: entity without a name skipped".into());
                    continue;
                };
                let attributes = get(item, "attributes")
                    .and_then(Value::as_array)
                    .map(|attrs| {
                        attrs
                            .iter()
                            .filter_map(Value::as_object)
                            .filter_map(|a| {
                                Some(Attribute {
                                    attribute: text_field(a, "attribute")?,
                                    value: text_field(a, "value").unwrap_or_default(),
                                })
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                graph.entities.push(Entity {
                    entity: name,
                    attributes,
                });
            }
        }
        None => w.push("scene_graph: missing key 'entities'".into()),
    }
    match get(obj, "relationships").and_then(Value::as_array) {
        Some(items) => {
            for item in items.iter().filter_map(Value::as_object) {
                let relationship = text_field(item, "relationship").unwrap_or_default();
                match text_field(item, "reasoning").filter(|r| !r.trim().is_empty()) {
                    Some(reasoning) => graph.relationships.push(Relationship {
                        relationship,
                        reasoning,
                    }),
                    None => w.push(format!(
                        "scene_graph: relationship {relationship:?} without reasoning skipped"
                    )),
                }
            }
        }
        None => w.push("scene_graph: missing key 'relationships'".into()),
    }
    graph
}

fn na_to_none(s: Option<String>) -> Option<String> {
    s.filter(|v| !is_na_sentinel(v))
        .map(|v| v.trim().to_string())
}

fn abstract_idea(obj: &Map<String, Value>, w: &mut Vec<String>) -> AbstractIdea {
    match get(obj, "abstract_idea") {
        Some(Value::Object(inner)) => AbstractIdea {
            idea: na_to_none(text_field(inner, "idea")),
            reasoning: na_to_none(text_field(inner, "reasoning")),
        },
        Some(v) => AbstractIdea {
            idea: na_to_none(scalar_text(v)),
            reasoning: na_to_none(text_field(obj, "reasoning")),
        },
        None => match text_field(obj, "idea") {
            Some(idea) => AbstractIdea {
                idea: na_to_none(Some(idea)),
                reasoning: na_to_none(text_field(obj, "reasoning")),
            },
            None => {
                w.push("abstract: missing key 'abstract_idea'".into());
                AbstractIdea::default()
            }
        },
    }
}

fn prompts(obj: &Map<String, Value>, w: &mut Vec<String>) -> SpecialistPrompts {
    let mut one = |keys: &[&str]| -> AgentPrompt {
        let found = keys.iter().find_map(|k| get(obj, k));
        match found {
            Some(Value::Object(p)) => AgentPrompt {
                prompt: na_to_none(text_field(p, "prompt")).unwrap_or_default(),
                reasoning: text_field(p, "reasoning").unwrap_or_default(),
            },
            Some(v) => AgentPrompt {
                prompt: na_to_none(scalar_text(v)).unwrap_or_default(),
                reasoning: String::new(),
            },
            None => {
                w.push(format!("prompts: missing key '{}'", keys[0]));
                AgentPrompt::default()
            }
        }
    };
    SpecialistPrompts {
        event_prompt: one(&["global_event_specialist", "event_specialist"]),
        temporal_prompt: one(&["temporal_specialist"]),
        geo_prompt: one(&["spatial_specialist", "geospatial_specialist"]),
    }
}

fn temporal(obj: &Map<String, Value>, w: &mut Vec<String>) -> TemporalPrediction {
    let mut value = TemporalValue::default();
    for unit in TemporalUnit::ALL {
        let raw = get(obj, unit.key()).or_else(|| {
            (unit == TemporalUnit::Day)
                .then(|| get(obj, "date"))
                .flatten()
        });
        match raw {
            None => w.push(format!("temporal: missing key '{unit}'")),
            Some(Value::Null) => {}
            Some(v) => match scalar_text(v) {
                Some(text) => {
                    let n = normalize_temporal_field(&text, unit);
                    w.extend(n.warning);
                    value.set(unit, n.value);
                }
                None => w.push(format!("temporal: '{unit}' is not a scalar")),
            },
        }
    }
    TemporalPrediction {
        value,
        time_of_day: na_to_none(text_field(obj, "time_of_day")),
        reasoning: reasoning(obj),
    }
}

fn geo(obj: &Map<String, Value>, w: &mut Vec<String>) -> GeoPrediction {
    let mut field = |key: &str| match get(obj, key) {
        None => {
            w.push(format!("geo: missing key '{key}'"));
            None
        }
        Some(v) => scalar_text(v).and_then(|s| normalize_geo_field(&s)),
    };
    let value = GeoName {
        country: field("country"),
        state_or_province: field("state_or_province"),
        city: field("city"),
    };
    GeoPrediction {
        value,
        reasoning: reasoning(obj),
    }
}

fn event_part(obj: &Map<String, Value>, key: &str, w: &mut Vec<String>) -> ValueWithReasoning {
    match get(obj, key) {
        Some(Value::Object(inner)) => ValueWithReasoning {
            value: na_to_none(text_field(inner, "value")).unwrap_or_default(),
            reasoning: text_field(inner, "reasoning").unwrap_or_default(),
        },
        Some(v) => ValueWithReasoning {
            value: na_to_none(scalar_text(v)).unwrap_or_default(),
            reasoning: text_field(obj, &format!("{key}_reasoning")).unwrap_or_default(),
        },
        None => {
            w.push(format!("event: missing key '{key}'"));
            ValueWithReasoning::default()
        }
    }
}

fn event(obj: &Map<String, Value>, w: &mut Vec<String>) -> EventPrediction {
    EventPrediction {
        event: event_part(obj, "event", w),
        background: event_part(obj, "background", w),
    }
}

fn combined(obj: &Map<String, Value>, w: &mut Vec<String>) -> PredictionBundle {
    let section = |keys: &[&str]| {
        keys.iter()
            .find_map(|k| get(obj, k).and_then(Value::as_object))
            .unwrap_or(obj)
    };
    let temporal_src = section(&["temporal", "temporal_information"]);
    let geo_src = section(&["geospatial", "geo", "geospatial_information"]);
    // the bundle's own wire shape nests both event parts under "event"
    let event_src = match get(obj, "event").and_then(Value::as_object) {
        Some(inner) if get(inner, "event").is_some() || get(inner, "background").is_some() => inner,
        _ => obj,
    };
    let mut bundle = PredictionBundle {
        temporal: temporal(temporal_src, w),
        geo: geo(geo_src, w),
        event: event(event_src, w),
    };
    let shared = reasoning(obj);
    if bundle.temporal.reasoning.is_empty() {
        bundle.temporal.reasoning = shared.clone();
    }
    if bundle.geo.reasoning.is_empty() {
        bundle.geo.reasoning = shared;
    }
    bundle
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::extract_json_payload;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn inauguration_temporal_cross() {
        let payload = json!({
            "id": 317,
            "response": {
                "century": "21st", "day": "20th", "decade": "2010s", "month": "October",
                "reasoning": "r", "time_of_day": "Day", "year": "2019"
            }
        });
        let v = validate_payload(&payload, Schema::Temporal).unwrap();
        let Payload::Temporal(t) = v.record else {
            panic!()
        };
        assert_eq!(
            t.value,
            TemporalValue {
                century: Some(21),
                decade: Some(2010),
                year: Some(2019),
                month: Some(10),
                day: Some(20)
            }
        );
        assert_eq!(t.time_of_day.as_deref(), Some("Day"));
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn empty_geo_object() {
        let v = validate_payload(&json!({}), Schema::Geo).unwrap();
        assert_eq!(v.record, Payload::Geo(GeoPrediction::default()));
        assert_eq!(v.warnings.len(), 3);
    }

    #[test]
    fn array_is_mismatch() {
        let err = validate_payload(&json!([1, 2]), Schema::Geo).unwrap_err();
        assert_eq!(
            err,
            SchemaError::SchemaMismatch {
                schema: Schema::Geo,
                found: "array"
            }
        );
    }

    #[test]
    fn capitalized_geo_keys() {
        let v = validate_payload(
            &json!({"Country": "Indonesia", "State_or_Province": "NA", "City": "Jakarta", "reasoning": "x"}),
            Schema::Geo,
        )
        .unwrap();
        let Payload::Geo(g) = v.record else { panic!() };
        assert_eq!(
            g.value,
            GeoName::new(Some("Indonesia"), None, Some("Jakarta"))
        );
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn numeric_temporal_values() {
        let v = validate_payload(
            &json!({"year": 2019, "month": 10, "century": null}),
            Schema::Temporal,
        )
        .unwrap();
        let Payload::Temporal(t) = v.record else {
            panic!()
        };
        assert_eq!(t.value.year, Some(2019));
        assert_eq!(t.value.month, Some(10));
        assert_eq!(t.value.century, None);
        // decade and day missing
        assert_eq!(v.warnings.len(), 2);
    }

    #[test]
    fn flat_event_shape() {
        let v = validate_payload(
            &json!({"event": "Summit", "event_reasoning": "flags", "background": "NA", "background_reasoning": ""}),
            Schema::Event,
        )
        .unwrap();
        let Payload::Event(e) = v.record else {
            panic!()
        };
        assert_eq!(e.event.value, "Summit");
        assert_eq!(e.event.reasoning, "flags");
        assert_eq!(e.background.value, "");
    }

    #[test]
    fn abstract_shapes() {
        let nested = json!({"abstract_idea": {"idea": "A ceremonial oath or affirmation.", "reasoning": "r"}});
        let Payload::Abstract(a) = validate_payload(&nested, Schema::Abstract).unwrap().record
        else {
            panic!()
        };
        assert_eq!(a.idea.as_deref(), Some("A ceremonial oath or affirmation."));
        let flat = json!({"abstract_idea": "Protest", "reasoning": "signs"});
        let Payload::Abstract(a) = validate_payload(&flat, Schema::Abstract).unwrap().record else {
            panic!()
        };
        assert_eq!(a.idea.as_deref(), Some("Protest"));
        assert_eq!(a.reasoning.as_deref(), Some("signs"));
    }

    #[test]
    fn combined_nested_and_flat() {
        let nested = json!({
            "temporal": {"century": "21st", "decade": "2010s", "year": "2019", "month": "NA", "day": "NA"},
            "geospatial": {"country": "Indonesia", "state_or_province": "NA", "city": "Jakarta"},
            "event": "Inauguration", "background": "Second term", "reasoning": "oath"
        });
        let Payload::Combined(b) = validate_payload(&nested, Schema::Combined).unwrap().record
        else {
            panic!()
        };
        assert_eq!(b.temporal.value.year, Some(2019));
        assert_eq!(b.geo.value.city.as_deref(), Some("Jakarta"));
        assert_eq!(b.event.event.value, "Inauguration");
        assert_eq!(b.temporal.reasoning, "oath");

        let flat = json!({"century": "20th", "decade": "1960s", "year": "1969", "month": "July", "day": "20th",
                          "country": "United States", "state_or_province": "NA", "city": "NA",
                          "event": "Moon landing", "background": "Space race"});
        let v = validate_payload(&flat, Schema::Combined).unwrap();
        let Payload::Combined(b) = v.record else {
            panic!()
        };
        assert_eq!(b.temporal.value.month, Some(7));
        assert_eq!(b.geo.value.country.as_deref(), Some("United States"));
        assert!(v.warnings.is_empty());
    }

    #[test]
    fn combined_accepts_bundle_wire_shape() {
        let mut b = PredictionBundle::default();
        b.event.event.value = "Inauguration".into();
        b.event.background.value = "Second term".into();
        b.temporal.value.year = Some(2019);
        b.geo.value.city = Some("Jakarta".into());
        let v = validate_payload(&b.to_wire(), Schema::Combined).unwrap();
        let Payload::Combined(got) = v.record else {
            panic!()
        };
        assert_eq!(got.event, b.event);
        assert_eq!(got.temporal.value, b.temporal.value);
        assert_eq!(got.geo.value, b.geo.value);
    }

    #[test]
    fn relationship_without_reasoning_dropped() {
        let v = validate_payload(
            &json!({"entities": [{"entity": "podium", "attributes": []}],
                    "relationships": [{"relationship": "on", "reasoning": ""}]}),
            Schema::SceneGraph,
        )
        .unwrap();
        let Payload::SceneGraph(g) = v.record else {
            panic!()
        };
        assert_eq!(g.entities.len(), 1);
        assert!(g.relationships.is_empty());
        assert_eq!(v.warnings.len(), 1);
    }

    fn opt_name() -> impl Strategy<Value = Option<String>> {
        prop::option::of(
            "[A-Z][a-z]{2,10}( [A-Z][a-z]{2,8})?".prop_filter("sentinel", |s| !is_na_sentinel(s)),
        )
    }

    fn temporal_value() -> impl Strategy<Value = TemporalValue> {
        (
            prop::option::of(1..30i32),
            prop::option::of((100..250i32).prop_map(|d| d * 10)),
            prop::option::of(1000..2100i32),
            prop::option::of(1..=12i32),
            prop::option::of(1..=31i32),
        )
            .prop_map(|(century, decade, year, month, day)| TemporalValue {
                century,
                decade,
                year,
                month,
                day,
            })
    }

    proptest! {
        #[test]
        fn render_extract_validate_roundtrip(
            value in temporal_value(),
            country in opt_name(), state in opt_name(), city in opt_name(),
            event in opt_name(), background in opt_name(),
        ) {
            let t = TemporalPrediction { value, time_of_day: None, reasoning: "because".into() };
            let text = format!("```json\n{}\n```", t.to_wire());
            let Payload::Temporal(back) = validate_payload(&extract_json_payload(&text).unwrap(), Schema::Temporal).unwrap().record else { unreachable!() };
            prop_assert_eq!(back, t);

            let g = GeoPrediction { value: GeoName { country, state_or_province: state, city }, reasoning: "r".into() };
            let text = format!("Result: {} end", g.to_wire());
            let Payload::Geo(back) = validate_payload(&extract_json_payload(&text).unwrap(), Schema::Geo).unwrap().record else { unreachable!() };
            prop_assert_eq!(back, g);

            let e = EventPrediction {
                event: ValueWithReasoning { value: event.unwrap_or_default(), reasoning: "a".into() },
                background: ValueWithReasoning { value: background.unwrap_or_default(), reasoning: "b".into() },
            };
            let Payload::Event(back) = validate_payload(&extract_json_payload(&e.to_wire().to_string()).unwrap(), Schema::Event).unwrap().record else { unreachable!() };
            prop_assert_eq!(back, e);
        }

        #[test]
        fn any_object_validates(keys in prop::collection::vec("[a-z_]{1,12}", 0..6), vals in prop::collection::vec("[ -~]{0,12}", 6)) {
            let mut m = Map::new();
            for (k, v) in keys.iter().zip(vals.iter()) {
                m.insert(k.clone(), Value::String(v.clone()));
            }
            let payload = Value::Object(m);
            for schema in [Schema::SceneGraph, Schema::Abstract, Schema::Prompts, Schema::Temporal, Schema::Geo, Schema::Event, Schema::Combined] {
                prop_assert!(validate_payload(&payload, schema).is_ok());
            }
        }
    }
}
