use serde_json::json;

use super::capture::now_ms;
use super::{
    Backend, BackendError, BackendRequest, CaptureLog, CaptureRecord, Limiter, Part, Stage,
};
use crate::schema::{extract_json_payload, validate_payload, Validated};

pub const CORRECTIVE_INSTRUCTION: &str =
    "Your previous reply was not valid JSON matching the required format. Return ONLY the JSON object.";

/// Everything a stage call needs besides the request itself.
#[derive(Clone, Copy)]
pub struct CallContext<'a> {
    pub backend: &'a dyn Backend,
    pub capture: Option<&'a CaptureLog>,
    pub limiter: Option<&'a Limiter>,
    pub max_parse_retries: u32,
}

impl<'a> CallContext<'a> {
    pub fn new(backend: &'a dyn Backend) -> Self {
        CallContext {
            backend,
            capture: None,
            limiter: None,
            max_parse_retries: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Degraded {
    pub stage: Stage,
    pub reason: String,
    /// The transport gave up, as opposed to unparseable replies.
    pub backend_exhausted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub result: Result<Validated, Degraded>,
    /// Number of `send` calls made, corrective re-prompts included.
    pub sends: u32,
}

/// Sends `req`, extracts and validates the reply, and re-prompts with a
/// corrective instruction on unparseable output. Never fails: persistent
/// failure comes back as `Degraded`.
pub fn call_and_parse(req: &BackendRequest, ctx: &CallContext<'_>) -> StageOutcome {
    let mut last = String::new();
    for k in 0..=ctx.max_parse_retries {
        let mut attempt_req = req.clone();
        attempt_req.parse_attempt = k;
        if k > 0 {
            attempt_req
                .user_parts
                .push(Part::Text(CORRECTIVE_INSTRUCTION.to_string()));
        }
        let sent_ms = now_ms();
        let reply = {
            let _permit = ctx.limiter.map(Limiter::acquire);
            ctx.backend.send(&attempt_req)
        };
        if let Some(log) = ctx.capture {
            let response = match &reply {
                Ok(r) => {
                    json!({"raw_text": r.raw_text, "latency_ms": r.latency_ms, "attempt": r.attempt})
                }
                Err(e) => json!({"error": e.to_string()}),
            };
            let rec = CaptureRecord {
                request: CaptureRecord::request_json(&attempt_req),
                response,
                timestamps: json!({"sent_ms": sent_ms, "received_ms": now_ms()}),
            };
            if let Err(e) = log.record(&rec) {
                log::error!("capture log write failed: {e}");
            }
        }
        let reply = match reply {
            Ok(r) => r,
            Err(e) => {
                let exhausted = matches!(e, BackendError::BackendExhausted { .. });
                return StageOutcome {
                    result: Err(Degraded {
                        stage: req.stage,
                        reason: e.to_string(),
                        backend_exhausted: exhausted,
                    }),
                    sends: k + 1,
                };
            }
        };
        match extract_json_payload(&reply.raw_text).and_then(|v| validate_payload(&v, req.schema)) {
            Ok(validated) => {
                return StageOutcome {
                    result: Ok(validated),
                    sends: k + 1,
                }
            }
            Err(e) => {
                log::debug!(
                    "{} {} parse attempt {} failed: {e}",
                    req.image_id,
                    req.stage,
                    k + 1
                );
                last = e.to_string();
            }
        }
    }
    StageOutcome {
        result: Err(Degraded {
            stage: req.stage,
            reason: format!(
                "unparseable after {} attempts: {last}",
                ctx.max_parse_retries + 1
            ),
            backend_exhausted: false,
        }),
        sends: ctx.max_parse_retries + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{MockBackend, MockEntry};
    use crate::schema::Payload;

    fn mock(replies: &[&str]) -> MockBackend {
        MockBackend::from_entries(replies.iter().map(|r| MockEntry {
            stage: Stage::TemporalDirect,
            image_id: "1".into(),
            response_text: r.to_string(),
        }))
    }

    fn req() -> BackendRequest {
        BackendRequest::new(
            Stage::TemporalDirect,
            "1",
            "sys".into(),
            vec![Part::Text("go".into())],
        )
    }

    const GOOD: &str = r#"{"century":"21st","decade":"2010s","year":"2019","month":"October","day":"20th","time_of_day":"NA","reasoning":"r"}"#;

    #[test]
    fn first_try() {
        let m = mock(&[GOOD]);
        let out = call_and_parse(&req(), &CallContext::new(&m));
        assert_eq!(out.sends, 1);
        assert!(
            matches!(out.result.unwrap().record, Payload::Temporal(t) if t.value.year == Some(2019))
        );
    }

    #[test]
    fn retry_path() {
        let m = mock(&["sorry", "still no", GOOD]);
        let out = call_and_parse(&req(), &CallContext::new(&m));
        assert_eq!(out.sends, 3);
        assert!(out.result.is_ok());
        assert_eq!(m.calls(), 3);
    }

    #[test]
    fn persistent_garbage_degrades() {
        let m = mock(&["garbage"]);
        let out = call_and_parse(&req(), &CallContext::new(&m));
        assert_eq!(out.sends, 3);
        let d = out.result.unwrap_err();
        assert_eq!(d.stage, Stage::TemporalDirect);
        assert!(!d.backend_exhausted);
    }

    #[test]
    fn missing_fixture_degrades_without_retry() {
        let m = MockBackend::default();
        let out = call_and_parse(&req(), &CallContext::new(&m));
        assert_eq!(out.sends, 1);
        assert!(out.result.is_err());
    }

    #[test]
    fn corrective_text_is_appended() {
        use std::sync::{Arc, Mutex};
        #[derive(Clone, Default)]
        struct Buf(Arc<Mutex<Vec<u8>>>);
        impl std::io::Write for Buf {
            fn write(&mut self, b: &[u8]) -> std::io::Result<usize> {
                self.0.lock().unwrap().extend_from_slice(b);
                Ok(b.len())
            }
            fn flush(&mut self) -> std::io::Result<()> {
                Ok(())
            }
        }
        let buf = Buf::default();
        let log = CaptureLog::to_writer(buf.clone());
        let m = mock(&["x", GOOD]);
        let mut ctx = CallContext::new(&m);
        ctx.capture = Some(&log);
        call_and_parse(&req(), &ctx);
        let text = String::from_utf8(buf.0.lock().unwrap().clone()).unwrap();
        let lines: Vec<serde_json::Value> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0]["request"]["user_parts"].as_array().unwrap().len(),
            1
        );
        assert_eq!(
            lines[1]["request"]["user_parts"][1]["text"],
            CORRECTIVE_INSTRUCTION
        );
        assert_eq!(lines[1]["response"]["raw_text"], GOOD);
    }
}
