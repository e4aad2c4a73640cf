use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use getreason::backend::{
    Backend, BackendError, BackendRequest, HttpBackend, HttpConfig, Part, RequestMapper, Stage,
};
use getreason::embedding::{EmbeddingProvider, RemoteEmbedder};
use getreason::schema::ImageBytes;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    headers: Vec<String>,
    body: Value,
}

/// Serves one scripted (status, body) reply per connection, then exits.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>, JoinHandle<()>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    let h = std::thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut r = BufReader::new(stream.try_clone().unwrap());
            let mut headers = Vec::new();
            let mut len = 0;
            loop {
                let mut line = String::new();
                r.read_line(&mut line).unwrap();
                let line = line.trim_end().to_string();
                if line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                headers.push(line);
            }
            let mut buf = vec![0; len];
            r.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Seen {
                headers,
                body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
            });
            let mut s = stream;
            write!(
                s,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen, h)
}

fn cfg(url: &str) -> HttpConfig {
    HttpConfig {
        endpoint: url.into(),
        model: "m".into(),
        backoff_base_ms: 1,
        timeout_secs: 5,
        ..Default::default()
    }
}

fn request() -> BackendRequest {
    let img = Arc::new(ImageBytes {
        bytes: vec![1, 2, 3],
        media_type: "image/png".into(),
    });
    let mut r = BackendRequest::new(
        Stage::SceneGraph,
        "img1",
        "system text".into(),
        vec![Part::Image(img), Part::Text("user text".into())],
    );
    r.public_figures = vec!["Ada Lovelace".into()];
    r
}

fn ok(text: &str) -> (u16, String) {
    (200, json!({ "text": text }).to_string())
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, seen, h) = serve(vec![
        (500, "{}".into()),
        (503, "{}".into()),
        ok("{\"a\":1}"),
    ]);
    let resp = HttpBackend::new(cfg(&url)).send(&request()).unwrap();
    h.join().unwrap();
    assert_eq!(resp.attempt, 3);
    assert_eq!(resp.raw_text, "{\"a\":1}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn rate_limit_is_retried() {
    let (url, _, h) = serve(vec![(429, "{}".into()), ok("x")]);
    let resp = HttpBackend::new(cfg(&url)).send(&request()).unwrap();
    h.join().unwrap();
    assert_eq!(resp.attempt, 2);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen, h) = serve(vec![(400, "{\"error\":\"bad\"}".into())]);
    let err = HttpBackend::new(cfg(&url)).send(&request()).unwrap_err();
    h.join().unwrap();
    assert!(
        matches!(err, BackendError::Rejected(ref m) if m.contains("400")),
        "{err}"
    );
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn retries_exhaust() {
    let mut c = cfg("");
    let (url, seen, h) = serve(vec![(500, "{}".into()); 3]);
    c.endpoint = url;
    c.max_retries = 2;
    let err = HttpBackend::new(c).send(&request()).unwrap_err();
    h.join().unwrap();
    assert!(
        matches!(err, BackendError::BackendExhausted { attempts: 3, .. }),
        "{err}"
    );
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn unreachable_endpoint_exhausts() {
    let mut c = cfg("http://127.0.0.1:9/v1");
    c.max_retries = 1;
    let err = HttpBackend::new(c).send(&request()).unwrap_err();
    assert!(
        matches!(err, BackendError::BackendExhausted { attempts: 2, .. }),
        "{err}"
    );
}

#[test]
fn generic_body_carries_image_and_figures_hint() {
    let (url, seen, h) = serve(vec![ok("x")]);
    HttpBackend::new(cfg(&url)).send(&request()).unwrap();
    h.join().unwrap();
    let body = &seen.lock().unwrap()[0].body;
    assert_eq!(body["system"], "system text");
    assert_eq!(body["stage"], "scene_graph");
    assert_eq!(body["parts"][0]["type"], "image");
    assert_eq!(body["parts"][0]["data"], "AQID");
    let last = body["parts"].as_array().unwrap().last().unwrap();
    assert_eq!(last["text"], "Public figures present: Ada Lovelace");
}

#[test]
fn figures_hint_can_be_disabled() {
    let mut c = cfg("http://unused");
    c.inject_public_figures = false;
    let body = HttpBackend::new(c).body(&request());
    assert_eq!(body["parts"].as_array().unwrap().len(), 2);
}

#[test]
fn openai_mapper_shape_and_reply() {
    let reply = json!({"choices": [{"message": {"content": "hello"}}]}).to_string();
    let (url, seen, h) = serve(vec![(200, reply)]);
    let mut c = cfg(&url);
    c.mapper = RequestMapper::OpenaiChat;
    c.temperature = Some(0.0);
    let resp = HttpBackend::new(c).send(&request()).unwrap();
    h.join().unwrap();
    assert_eq!(resp.raw_text, "hello");
    let body = &seen.lock().unwrap()[0].body;
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(
        body["messages"][1]["content"][0]["image_url"]["url"],
        "data:image/png;base64,AQID"
    );
    assert_eq!(body["temperature"], 0.0);
}

#[test]
fn api_key_is_sent_as_bearer() {
    std::env::set_var("GETREASON_TEST_KEY", "sekrit");
    let (url, seen, h) = serve(vec![ok("x")]);
    let mut c = cfg(&url);
    c.api_key_env = Some("GETREASON_TEST_KEY".into());
    HttpBackend::new(c).send(&request()).unwrap();
    h.join().unwrap();
    let headers = &seen.lock().unwrap()[0].headers;
    assert!(
        headers
            .iter()
            .any(|l| l.eq_ignore_ascii_case("authorization: Bearer sekrit")),
        "{headers:?}"
    );
}

#[test]
fn missing_api_key_is_rejected_without_a_call() {
    let mut c = cfg("http://127.0.0.1:9/v1");
    c.api_key_env = Some("GETREASON_TEST_KEY_UNSET".into());
    let err = HttpBackend::new(c).send(&request()).unwrap_err();
    assert!(matches!(err, BackendError::Rejected(_)), "{err}");
}

#[test]
fn reply_without_text_is_rejected() {
    let (url, _, h) = serve(vec![(200, "{\"other\":1}".into())]);
    let err = HttpBackend::new(cfg(&url)).send(&request()).unwrap_err();
    h.join().unwrap();
    assert!(matches!(err, BackendError::Rejected(_)));
}

#[test]
fn remote_embedder_round_trip() {
    let (url, seen, h) = serve(vec![(
        200,
        json!({"vectors": [[1.0, 0.0], [0.0, 2.0]]}).to_string(),
    )]);
    let e = RemoteEmbedder::new(url, 2, Duration::from_secs(5));
    let v = e.embed_batch(&["a", "b"]).unwrap();
    h.join().unwrap();
    assert_eq!(v[1].values, vec![0.0, 2.0]);
    assert_eq!(seen.lock().unwrap()[0].body, json!({"texts": ["a", "b"]}));
}

#[test]
fn remote_embedder_down_is_unavailable() {
    let e = RemoteEmbedder::new("http://127.0.0.1:9/embed", 2, Duration::from_secs(2));
    assert!(e.embed("a").is_err());
}
