use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, BackendRequest, BackendResponse, Part};

/// How the internal request shape is laid out on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestMapper {
    /// `{"model","system","parts":[..],"stage","schema","image_id"}` ->
    /// `{"text": ".."}`.
    #[default]
    Generic,
    /// Chat-completions layout with data-URL images;
    /// reply text at `choices[0].message.content`.
    OpenaiChat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    pub mapper: RequestMapper,
    /// Environment variable holding a bearer token. The token itself is
    /// never stored.
    pub api_key_env: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub temperature: Option<f64>,
    pub inject_public_figures: bool,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            model: String::new(),
            mapper: RequestMapper::Generic,
            api_key_env: None,
            timeout_secs: 120,
            max_retries: 3,
            backoff_base_ms: 500,
            temperature: None,
            inject_public_figures: true,
        }
    }
}

pub struct HttpBackend {
    cfg: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(cfg: HttpConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build();
        HttpBackend { cfg, agent }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.cfg
    }

    pub fn body(&self, req: &BackendRequest) -> Value {
        let parts = if self.cfg.inject_public_figures {
            req.parts_with_figures()
        } else {
            req.user_parts.clone()
        };
        match self.cfg.mapper {
            RequestMapper::Generic => {
                let parts: Vec<Value> = parts
                    .iter()
                    .map(|p| match p {
                        Part::Text(t) => json!({"type": "text", "text": t}),
                        Part::Image(img) => json!({
                            "type": "image",
                            "media_type": img.media_type,
                            "data": B64.encode(&img.bytes),
                        }),
                    })
                    .collect();
                let mut body = json!({
                    "model": self.cfg.model,
                    "system": req.system_prompt,
                    "parts": parts,
                    "stage": req.stage.name(),
                    "schema": req.schema.name(),
                    "image_id": req.image_id,
                });
                if let Some(t) = self.cfg.temperature {
                    body["temperature"] = json!(t);
                }
                body
            }
            RequestMapper::OpenaiChat => {
                let content: Vec<Value> = parts
                    .iter()
                    .map(|p| match p {
                        Part::Text(t) => json!({"type": "text", "text": t}),
                        Part::Image(img) => json!({
                            "type": "image_url",
                            "image_url": {"url": format!("data:{};base64,{}", img.media_type, B64.encode(&img.bytes))},
                        }),
                    })
                    .collect();
                let mut body = json!({
                    "model": self.cfg.model,
                    "messages": [
                        {"role": "system", "content": req.system_prompt},
                        {"role": "user", "content": content},
                    ],
                });
                if let Some(t) = self.cfg.temperature {
                    body["temperature"] = json!(t);
                }
                body
            }
        }
    }

    fn reply_text(&self, v: &Value) -> Option<String> {
        let text = match self.cfg.mapper {
            RequestMapper::Generic => v.get("text"),
            RequestMapper::OpenaiChat => v.pointer("/choices/0/message/content"),
        };
        text.and_then(Value::as_str).map(str::to_string)
    }

    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(
            self.cfg
                .backoff_base_ms
                .saturating_mul(1u64 << (attempt - 1).min(16)),
        )
    }
}

enum Failure {
    Retryable(String),
    Fatal(String),
}

impl HttpBackend {
    fn attempt_once(&self, body: &Value) -> Result<String, Failure> {
        let mut call = self.agent.post(&self.cfg.endpoint);
        if let Some(var) = &self.cfg.api_key_env {
            match std::env::var(var) {
                Ok(key) => call = call.set("Authorization", &format!("Bearer {key}")),
                Err(_) => {
                    return Err(Failure::Fatal(format!(
                        "environment variable {var} is not set"
                    )))
                }
            }
        }
        match call.send_json(body) {
            Ok(resp) => {
                let v: Value = resp
                    .into_json()
                    .map_err(|e| Failure::Retryable(format!("reading body: {e}")))?;
                self.reply_text(&v)
                    .ok_or_else(|| Failure::Fatal("reply has no text field".into()))
            }
            Err(ureq::Error::Status(code, resp)) => {
                let detail = resp.into_string().unwrap_or_default();
                let msg = format!(
                    "HTTP {code}: {}",
                    detail.chars().take(200).collect::<String>()
                );
                if code >= 500 || code == 429 {
                    Err(Failure::Retryable(msg))
                } else {
                    Err(Failure::Fatal(msg))
                }
            }
            Err(ureq::Error::Transport(t)) => Err(Failure::Retryable(t.to_string())),
        }
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> &str {
        "http"
    }

    fn params(&self) -> Value {
        json!({
            "endpoint": self.cfg.endpoint,
            "model": self.cfg.model,
            "mapper": self.cfg.mapper,
            "timeout_secs": self.cfg.timeout_secs,
            "max_retries": self.cfg.max_retries,
            "backoff_base_ms": self.cfg.backoff_base_ms,
            "temperature": self.cfg.temperature,
            "inject_public_figures": self.cfg.inject_public_figures,
        })
    }

    /// Retries transport errors, 429 and 5xx with exponential backoff,
    /// `max_retries` times after the first attempt.
    fn send(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        req.check()?;
        let body = self.body(req);
        let start = Instant::now();
        let mut attempt = 1;
        loop {
            match self.attempt_once(&body) {
                Ok(raw_text) => {
                    return Ok(BackendResponse {
                        raw_text,
                        latency_ms: start.elapsed().as_millis() as u64,
                        attempt,
                    })
                }
                Err(Failure::Fatal(msg)) => return Err(BackendError::Rejected(msg)),
                Err(Failure::Retryable(msg)) => {
                    if attempt > self.cfg.max_retries {
                        return Err(BackendError::BackendExhausted {
                            attempts: attempt,
                            last: msg,
                        });
                    }
                    log::warn!(
                        "{} {} attempt {attempt} failed: {msg}",
                        req.image_id,
                        req.stage
                    );
                    std::thread::sleep(self.backoff(attempt));
                    attempt += 1;
                }
            }
        }
    }
}
