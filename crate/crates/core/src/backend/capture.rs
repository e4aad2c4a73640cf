use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{sha256_hex, BackendRequest, Part};

/// One request/response exchange. Images are recorded by digest and size;
/// the bytes are already addressable through the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureRecord {
    pub request: Value,
    pub response: Value,
    pub timestamps: Value,
}

impl CaptureRecord {
    pub fn request_json(req: &BackendRequest) -> Value {
        let parts: Vec<Value> = req
            .parts_with_figures()
            .iter()
            .map(|p| match p {
                Part::Text(t) => json!({"text": t}),
                Part::Image(img) => json!({"image": {
                    "media_type": img.media_type,
                    "sha256": sha256_hex(&img.bytes),
                    "bytes": img.bytes.len(),
                }}),
            })
            .collect();
        json!({
            "stage": req.stage,
            "image_id": req.image_id,
            "schema": req.schema,
            "parse_attempt": req.parse_attempt,
            "system_prompt": req.system_prompt,
            "user_parts": parts,
        })
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Append-only JSONL log shared by concurrent workers. Each record is
/// flushed before the reply is parsed.
pub struct CaptureLog {
    sink: Mutex<Box<dyn Write + Send>>,
}

impl CaptureLog {
    pub fn create(path: &Path) -> io::Result<Self> {
        let file: File = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CaptureLog {
            sink: Mutex::new(Box::new(file)),
        })
    }

    pub fn to_writer(w: impl Write + Send + 'static) -> Self {
        CaptureLog {
            sink: Mutex::new(Box::new(w)),
        }
    }

    pub fn record(&self, rec: &CaptureRecord) -> io::Result<()> {
        let line = serde_json::to_string(rec)?;
        let mut sink = self.sink.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(sink, "{line}")?;
        sink.flush()
    }
}
