use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Backend, BackendError, BackendRequest, BackendResponse, Stage};

/// One fixture line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MockEntry {
    pub stage: Stage,
    pub image_id: String,
    pub response_text: String,
}

/// Replays canned replies keyed by (stage, image id). When a key has several
/// entries, the n-th corrective re-prompt gets the n-th entry and the last
/// entry repeats, so retry paths can be scripted without hidden state.
#[derive(Debug, Default)]
pub struct MockBackend {
    replies: HashMap<(Stage, String), Vec<String>>,
    calls: AtomicUsize,
    by_key: Mutex<BTreeMap<(String, Stage), usize>>,
}

impl MockBackend {
    pub fn from_entries(entries: impl IntoIterator<Item = MockEntry>) -> Self {
        let mut replies: HashMap<(Stage, String), Vec<String>> = HashMap::new();
        for e in entries {
            replies
                .entry((e.stage, e.image_id))
                .or_default()
                .push(e.response_text);
        }
        MockBackend {
            replies,
            ..Default::default()
        }
    }

    pub fn parse_jsonl(text: &str) -> Result<Self, BackendError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let e: MockEntry = serde_json::from_str(line)
                .map_err(|err| BackendError::Fixture(format!("line {}: {err}", i + 1)))?;
            entries.push(e);
        }
        Ok(MockBackend::from_entries(entries))
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path)
            .map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))?;
        MockBackend::parse_jsonl(&text)
    }

    /// Total `send` calls, including ones that hit no fixture.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn calls_for_image(&self, image_id: &str) -> usize {
        self.counts()
            .iter()
            .filter(|((id, _), _)| id == image_id)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn calls_for_stage(&self, stage: Stage) -> usize {
        self.counts()
            .iter()
            .filter(|((_, s), _)| *s == stage)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn counts(&self) -> BTreeMap<(String, Stage), usize> {
        self.by_key
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn reset_counts(&self) {
        self.calls.store(0, Ordering::SeqCst);
        self.by_key
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clear();
    }
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        "mock"
    }

    fn params(&self) -> serde_json::Value {
        json!({"fixture_keys": self.replies.len()})
    }

    fn send(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        *self
            .by_key
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .entry((req.image_id.clone(), req.stage))
            .or_insert(0) += 1;
        req.check()?;
        let replies = self
            .replies
            .get(&(req.stage, req.image_id.clone()))
            .filter(|r| !r.is_empty())
            .ok_or_else(|| BackendError::FixtureMissing {
                stage: req.stage,
                image_id: req.image_id.clone(),
            })?;
        let idx = (req.parse_attempt as usize).min(replies.len() - 1);
        Ok(BackendResponse {
            raw_text: replies[idx].clone(),
            latency_ms: 0,
            attempt: 1,
        })
    }
}
