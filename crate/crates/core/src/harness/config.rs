use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::PipelineConfig;
use crate::backend::{Backend, HttpBackend, HttpConfig, MockBackend};
use crate::embedding::{EmbeddingProvider, RemoteEmbedder, StubEmbedder, STUB_DIM};
use crate::gazetteer::Gazetteer;
use crate::metrics::{GeoConfig, Profile, TemporalConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSection {
    pub kind: BackendKind,
    /// Mock fixture JSONL.
    pub fixtures: Option<PathBuf>,
    pub http: HttpConfig,
    pub max_parse_retries: u32,
    pub max_in_flight: usize,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            kind: BackendKind::Mock,
            fixtures: None,
            http: HttpConfig::default(),
            max_parse_retries: 2,
            max_in_flight: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingKind {
    #[default]
    Stub,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingSection {
    pub kind: EmbeddingKind,
    pub url: Option<String>,
    pub dim: usize,
    pub timeout_secs: u64,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            kind: EmbeddingKind::Stub,
            url: None,
            dim: STUB_DIM,
            timeout_secs: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsSection {
    pub geo: GeoConfig,
    pub temporal: TemporalConfig,
}

/// Harness configuration, read from TOML. Relative paths resolve against
/// the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub run_id: Option<String>,
    pub dataset: Option<PathBuf>,
    pub runs_dir: PathBuf,
    pub profile: Profile,
    /// CSV gazetteer; the bundled table when unset.
    pub gazetteer: Option<PathBuf>,
    pub workers: usize,
    /// Abort when more than this fraction of records exhausted the backend.
    pub abort_fraction: f64,
    pub pipeline: PipelineConfig,
    pub backend: BackendSection,
    pub embedding: EmbeddingSection,
    pub metrics: MetricsSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            run_id: None,
            dataset: None,
            runs_dir: PathBuf::from("runs"),
            profile: Profile::Tara,
            gazetteer: None,
            workers: 4,
            abort_fraction: 0.5,
            pipeline: PipelineConfig::default(),
            backend: BackendSection::default(),
            embedding: EmbeddingSection::default(),
            metrics: MetricsSection::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Config::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.dataset.as_mut() {
            fix(p);
        }
        fix(&mut self.runs_dir);
        if let Some(p) = self.gazetteer.as_mut() {
            fix(p);
        }
        if let Some(p) = self.backend.fixtures.as_mut() {
            fix(p);
        }
    }

    pub fn dataset_path(&self) -> Result<&Path, HarnessError> {
        self.dataset
            .as_deref()
            .ok_or_else(|| HarnessError::Config("no dataset path given".into()))
    }

    pub fn build_gazetteer(&self) -> Result<Gazetteer, HarnessError> {
        let gz = match &self.gazetteer {
            Some(p) => Gazetteer::from_path(p)
                .map_err(|e| HarnessError::Config(format!("gazetteer {}: {e}", p.display())))?,
            None => Gazetteer::bundled(),
        };
        for w in gz.warnings() {
            log::warn!("gazetteer: {w}");
        }
        Ok(gz)
    }

    pub fn build_embedder(&self) -> Result<Box<dyn EmbeddingProvider>, HarnessError> {
        match self.embedding.kind {
            EmbeddingKind::Stub => Ok(Box::new(StubEmbedder::with_dim(self.embedding.dim))),
            EmbeddingKind::Remote => {
                let url = self.embedding.url.clone().ok_or_else(|| {
                    HarnessError::Config("remote embedding needs embedding.url".into())
                })?;
                Ok(Box::new(RemoteEmbedder::new(
                    url,
                    self.embedding.dim,
                    Duration::from_secs(self.embedding.timeout_secs),
                )))
            }
        }
    }

    pub fn build_backend(&self) -> Result<Box<dyn Backend>, HarnessError> {
        match self.backend.kind {
            BackendKind::Mock => {
                let path = self.backend.fixtures.as_deref().ok_or_else(|| {
                    HarnessError::Config("mock backend needs backend.fixtures".into())
                })?;
                Ok(Box::new(
                    MockBackend::load(path).map_err(|e| HarnessError::Config(e.to_string()))?,
                ))
            }
            BackendKind::Http => {
                if self.backend.http.endpoint.is_empty() {
                    return Err(HarnessError::Config(
                        "http backend needs backend.http.endpoint".into(),
                    ));
                }
                Ok(Box::new(HttpBackend::new(self.backend.http.clone())))
            }
        }
    }
}
