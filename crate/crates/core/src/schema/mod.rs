//! Domain records, agent wire schemas, NA-normalization and JSON extraction
//! from raw model text.

mod dataset;
mod extract;
mod normalize;
mod types;
mod validate;

pub use dataset::{parse_record, DatasetError, ImageBytes, ImageRecord, ImageRef, ParsedRecord};
pub use extract::extract_json_payload;
pub use normalize::{
    is_na_sentinel, normalize_geo_field, normalize_temporal_field, render_temporal_field,
    Normalized, NA_SENTINELS,
};
pub use types::{
    AbstractIdea, AgentPrompt, Attribute, AugmentedSceneGraph, Entity, EventPrediction, GeoName,
    GeoPrediction, GroundTruth, PredictionBundle, Relationship, SceneGraph, SpecialistPrompts,
    TemporalPrediction, TemporalUnit, TemporalValue, ValueWithReasoning,
};
pub use validate::{validate_payload, Payload, Schema, Validated};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("no JSON object found in model output")]
    NoJsonFound,
    #[error("expected a JSON object for the {schema} schema, found {found}")]
    SchemaMismatch { schema: Schema, found: &'static str },
}
