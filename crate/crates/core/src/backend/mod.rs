//! Vision-language backends: the request/response shapes shared by every
//! stage, a fixture-driven mock, a live HTTP client, and the parse loop
//! that turns raw replies into typed records.

mod capture;
mod http;
mod limiter;
mod mock;
mod parse;

pub use capture::{CaptureLog, CaptureRecord};
pub use http::{HttpBackend, HttpConfig, RequestMapper};
pub use limiter::{Limiter, Permit};
pub use mock::{MockBackend, MockEntry};
pub use parse::{call_and_parse, CallContext, Degraded, StageOutcome, CORRECTIVE_INSTRUCTION};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::schema::{ImageBytes, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    SceneGraph,
    Abstract,
    Prompts,
    EventDirect,
    TemporalDirect,
    GeoDirect,
    EventCross,
    TemporalCross,
    GeoCross,
    ZeroshotCot,
    Detective,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::SceneGraph,
        Stage::Abstract,
        Stage::Prompts,
        Stage::EventDirect,
        Stage::TemporalDirect,
        Stage::GeoDirect,
        Stage::EventCross,
        Stage::TemporalCross,
        Stage::GeoCross,
        Stage::ZeroshotCot,
        Stage::Detective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::SceneGraph => "scene_graph",
            Stage::Abstract => "abstract",
            Stage::Prompts => "prompts",
            Stage::EventDirect => "event_direct",
            Stage::TemporalDirect => "temporal_direct",
            Stage::GeoDirect => "geo_direct",
            Stage::EventCross => "event_cross",
            Stage::TemporalCross => "temporal_cross",
            Stage::GeoCross => "geo_cross",
            Stage::ZeroshotCot => "zeroshot_cot",
            Stage::Detective => "detective",
        }
    }

    pub fn schema(self) -> Schema {
        match self {
            Stage::SceneGraph => Schema::SceneGraph,
            Stage::Abstract => Schema::Abstract,
            Stage::Prompts => Schema::Prompts,
            Stage::EventDirect | Stage::EventCross => Schema::Event,
            Stage::TemporalDirect | Stage::TemporalCross => Schema::Temporal,
            Stage::GeoDirect | Stage::GeoCross => Schema::Geo,
            Stage::ZeroshotCot | Stage::Detective => Schema::Combined,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Part {
    Text(String),
    Image(Arc<ImageBytes>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendRequest {
    pub stage: Stage,
    pub system_prompt: String,
    pub user_parts: Vec<Part>,
    pub schema: Schema,
    pub image_id: String,
    /// Names a mapper may append as a grounding hint.
    pub public_figures: Vec<String>,
    /// 0 for the first send, incremented by each corrective re-prompt.
    pub parse_attempt: u32,
}

impl BackendRequest {
    pub fn new(stage: Stage, image_id: &str, system_prompt: String, user_parts: Vec<Part>) -> Self {
        BackendRequest {
            stage,
            system_prompt,
            user_parts,
            schema: stage.schema(),
            image_id: image_id.to_string(),
            public_figures: Vec::new(),
            parse_attempt: 0,
        }
    }

    pub fn check(&self) -> Result<(), BackendError> {
        if self.user_parts.is_empty() {
            return Err(BackendError::InvalidRequest("user_parts is empty".into()));
        }
        let images = self
            .user_parts
            .iter()
            .filter(|p| matches!(p, Part::Image(_)))
            .count();
        if images > 1 {
            return Err(BackendError::InvalidRequest(format!(
                "{images} image parts, at most one allowed"
            )));
        }
        Ok(())
    }

    pub fn has_image(&self) -> bool {
        self.user_parts.iter().any(|p| matches!(p, Part::Image(_)))
    }

    /// The user parts with the public-figure hint appended when there are
    /// names to add.
    pub fn parts_with_figures(&self) -> Vec<Part> {
        let mut parts = self.user_parts.clone();
        if !self.public_figures.is_empty() {
            parts.push(Part::Text(public_figures_hint(&self.public_figures)));
        }
        parts
    }
}

pub fn public_figures_hint(names: &[String]) -> String {
    format!("Public figures present: {}", names.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub raw_text: String,
    pub latency_ms: u64,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend exhausted after {attempts} attempts: {last}")]
    BackendExhausted { attempts: u32, last: String },
    #[error("no fixture for stage {stage} and image '{image_id}'")]
    FixtureMissing { stage: Stage, image_id: String },
    #[error("backend rejected the request: {0}")]
    Rejected(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("fixture file: {0}")]
    Fixture(String),
}

/// A vision-language model endpoint. Implementations accept concurrent
/// `send` calls.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Non-secret parameters, recorded in run manifests.
    fn params(&self) -> serde_json::Value;

    fn send(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError>;
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
