use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use base64::Engine;
use serde_json::{Map, Value};
use thiserror::Error;

use super::normalize::{normalize_geo_field, normalize_temporal_field};
use super::types::{GeoName, GroundTruth, TemporalUnit, TemporalValue};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("record is not a JSON object")]
    NotAnObject,
    #[error("record has no '{0}' field")]
    MissingField(&'static str),
    #[error("inline image is not valid base64: {0}")]
    BadInlineImage(String),
}

/// Where the image bytes for a record live.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ImageRef {
    Path(PathBuf),
    Inline { bytes: Vec<u8>, media_type: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBytes {
    pub bytes: Vec<u8>,
    pub media_type: String,
}

impl ImageRef {
    pub fn load(&self) -> io::Result<ImageBytes> {
        match self {
            ImageRef::Path(path) => Ok(ImageBytes {
                bytes: fs::read(path)?,
                media_type: media_type_for(path).to_string(),
            }),
            ImageRef::Inline { bytes, media_type } => Ok(ImageBytes {
                bytes: bytes.clone(),
                media_type: media_type.clone(),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ImageRef::Path(p) => p.display().to_string(),
            ImageRef::Inline { bytes, media_type } => {
                format!("inline {media_type} ({} bytes)", bytes.len())
            }
        }
    }
}

fn media_type_for(path: &Path) -> &'static str {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "jpg" | "jpeg" => "image/jpeg",
        "png" => "image/png",
        "gif" => "image/gif",
        "webp" => "image/webp",
        _ => "application/octet-stream",
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub image: ImageRef,
    pub article_text: Option<String>,
    pub public_figures: Vec<String>,
    pub ground_truth: Option<GroundTruth>,
}

#[derive(Debug, Clone)]
pub struct ParsedRecord {
    pub record: ImageRecord,
    pub warnings: Vec<String>,
}

/// Parses one dataset JSONL line. Relative image paths resolve against
/// `base_dir`; `data:<type>;base64,<payload>` strings are inline images.
pub fn parse_record(line: &str, base_dir: &Path) -> Result<ParsedRecord, DatasetError> {
    let value: Value = serde_json::from_str(line)?;
    let obj = value.as_object().ok_or(DatasetError::NotAnObject)?;
    let id = match obj.get("id") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.trim().to_string(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err(DatasetError::MissingField("id")),
    };
    let image_raw = obj
        .get("image")
        .and_then(Value::as_str)
        .ok_or(DatasetError::MissingField("image"))?;
    let image = parse_image_ref(image_raw, base_dir)?;
    let article_text = obj
        .get("article")
        .and_then(Value::as_str)
        .map(str::to_string)
        .filter(|s| !s.trim().is_empty());
    let public_figures = obj
        .get("public_figures")
        .and_then(Value::as_array)
        .map(|names| {
            names
                .iter()
                .filter_map(Value::as_str)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default();
    let mut warnings = Vec::new();
    let ground_truth = obj
        .get("ground_truth")
        .and_then(Value::as_object)
        .map(|gt| parse_ground_truth(gt, &mut warnings));
    Ok(ParsedRecord {
        record: ImageRecord {
            id,
            image,
            article_text,
            public_figures,
            ground_truth,
        },
        warnings,
    })
}

fn parse_image_ref(raw: &str, base_dir: &Path) -> Result<ImageRef, DatasetError> {
    if let Some(rest) = raw.strip_prefix("data:") {
        let (meta, payload) = rest
            .split_once(',')
            .ok_or_else(|| DatasetError::BadInlineImage("missing ','".into()))?;
        let media_type = meta.strip_suffix(";base64").unwrap_or(meta);
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(payload.trim())
            .map_err(|e| DatasetError::BadInlineImage(e.to_string()))?;
        let media_type = if media_type.is_empty() {
            "application/octet-stream"
        } else {
            media_type
        };
        return Ok(ImageRef::Inline {
            bytes,
            media_type: media_type.to_string(),
        });
    }
    let path = Path::new(raw);
    Ok(ImageRef::Path(if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_dir.join(path)
    }))
}

fn text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn parse_ground_truth(gt: &Map<String, Value>, warnings: &mut Vec<String>) -> GroundTruth {
    let mut temporal = TemporalValue::default();
    if let Some(t) = gt.get("temporal").and_then(Value::as_object) {
        for unit in TemporalUnit::ALL {
            if let Some(raw) = t.get(unit.key()).and_then(text) {
                let n = normalize_temporal_field(&raw, unit);
                warnings.extend(n.warning);
                temporal.set(unit, n.value);
            }
        }
    }
    warnings.extend(temporal.consistency_warning());
    let geo = gt
        .get("geo")
        .and_then(Value::as_object)
        .map(|g| {
            let f = |k: &str| {
                g.get(k)
                    .and_then(text)
                    .and_then(|s| normalize_geo_field(&s))
            };
            GeoName {
                country: f("country"),
                state_or_province: f("state_or_province"),
                city: f("city"),
            }
        })
        .unwrap_or_default();
    let opt = |k: &str| {
        gt.get(k)
            .and_then(text)
            .and_then(|s| normalize_geo_field(&s))
    };
    let deductions = gt.get("deductions").and_then(Value::as_object).map(|d| {
        d.iter()
            .filter_map(|(k, v)| Some((k.clone(), text(v)?)))
            .collect::<BTreeMap<_, _>>()
    });
    GroundTruth {
        temporal,
        geo,
        event: opt("event"),
        background: opt("background"),
        deductions,
    }
}
