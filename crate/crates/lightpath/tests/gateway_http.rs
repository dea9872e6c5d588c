//! The HTTP gateway against a scripted local endpoint.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use lightpath::config::{GatewayConfig, GatewayMode};
use lightpath::data::BUNDLED_PROMPTS;
use lightpath::gateway::{GatewayError, HttpGateway, PromptTemplates, RephraseRequest, Rephraser};
use serde_json::{json, Value};

struct Captured {
    headers: Vec<(String, String)>,
    body: Value,
}

/// Serves one request with the given status and body; returns what it saw.
fn serve_once(status: u16, body: String, delay: Duration) -> (String, mpsc::Receiver<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let mut headers = Vec::new();
        let mut length = 0;
        loop {
            line.clear();
            reader.read_line(&mut line).unwrap();
            let l = line.trim_end();
            if l.is_empty() {
                break;
            }
            let (k, v) = l.split_once(':').unwrap();
            let (k, v) = (k.trim().to_ascii_lowercase(), v.trim().to_owned());
            if k == "content-length" {
                length = v.parse().unwrap();
            }
            headers.push((k, v));
        }
        let mut buf = vec![0; length];
        reader.read_exact(&mut buf).unwrap();
        let _ = tx.send(Captured {
            headers,
            body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
        });
        thread::sleep(delay);
        let mut stream = stream;
        let _ = write!(
            stream,
            "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        );
    });
    (url, rx)
}

fn config(url: &str, timeout_secs: u64) -> GatewayConfig {
    GatewayConfig {
        mode: GatewayMode::Http,
        endpoint: url.to_owned(),
        timeout_secs,
        ..GatewayConfig::default()
    }
}

fn prompts() -> PromptTemplates {
    PromptTemplates::from_toml(BUNDLED_PROMPTS).unwrap()
}

fn completion(text: &str) -> String {
    json!({ "choices": [{ "message": { "role": "assistant", "content": text } }] }).to_string()
}

#[test]
fn sends_grammar_prompt_with_zero_temperature_and_key() {
    let (url, rx) = serve_once(200, completion("We need a optical network connecting A1 and B2"), Duration::ZERO);
    let gw = HttpGateway::new(&config(&url, 10), prompts(), Some("sk-test".into()));
    let out = gw.rephrase(&RephraseRequest::new("connect A1 and B2")).unwrap();
    assert_eq!(out.as_str(), "We need a optical network connecting A1 and B2");
    let seen = rx.recv().unwrap();
    assert_eq!(seen.body["temperature"], 0.0);
    assert_eq!(seen.body["model"], "gpt-4o-mini");
    let messages = seen.body["messages"].as_array().unwrap();
    assert_eq!(messages[0]["role"], "system");
    assert!(messages[0]["content"].as_str().unwrap().contains("optical network connecting"));
    assert_eq!(messages[1]["content"], "connect A1 and B2");
    let auth = seen.headers.iter().find(|(k, _)| k == "authorization").unwrap();
    assert_eq!(auth.1, "Bearer sk-test");
}

#[test]
fn key_comes_from_the_named_environment_variable() {
    let (url, rx) = serve_once(200, completion("x"), Duration::ZERO);
    let mut cfg = config(&url, 10);
    cfg.api_key_env = "LIGHTPATH_TEST_KEY_FROM_ENV".into();
    // SAFETY: only this test reads or writes this variable
    unsafe { std::env::set_var("LIGHTPATH_TEST_KEY_FROM_ENV", "env-secret") };
    let gw = HttpGateway::from_env(&cfg, prompts());
    gw.rephrase(&RephraseRequest::new("x")).unwrap();
    let seen = rx.recv().unwrap();
    let auth = seen.headers.iter().find(|(k, _)| k == "authorization").unwrap();
    assert_eq!(auth.1, "Bearer env-secret");
}

#[test]
fn retry_prompt_carries_hint() {
    let (url, rx) = serve_once(200, completion("x"), Duration::ZERO);
    let gw = HttpGateway::new(&config(&url, 10), prompts(), None);
    gw.rephrase(&RephraseRequest::new("two sites").retry("write the budget with a $ sign"))
        .unwrap();
    let seen = rx.recv().unwrap();
    let user = seen.body["messages"][1]["content"].as_str().unwrap();
    assert!(user.contains("two sites") && user.contains("write the budget with a $ sign"));
    assert!(!seen.headers.iter().any(|(k, _)| k == "authorization"));
}

#[test]
fn non_success_status_is_reported() {
    let (url, _rx) = serve_once(429, r#"{"error":"slow down"}"#.into(), Duration::ZERO);
    let gw = HttpGateway::new(&config(&url, 10), prompts(), None);
    match gw.rephrase(&RephraseRequest::new("x")) {
        Err(GatewayError::Status { status, body }) => {
            assert_eq!(status, 429);
            assert!(body.contains("slow down"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_completion_is_bad_response() {
    let (url, _rx) = serve_once(200, r#"{"choices":[]}"#.into(), Duration::ZERO);
    let gw = HttpGateway::new(&config(&url, 10), prompts(), None);
    let err = gw.rephrase(&RephraseRequest::new("x")).unwrap_err();
    assert!(matches!(err, GatewayError::BadResponse(_)), "{err:?}");
    assert!(err.is_transport());
}

#[test]
fn connection_refused_is_transport() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    drop(listener);
    let gw = HttpGateway::new(&config(&url, 5), prompts(), None);
    let err = gw.rephrase(&RephraseRequest::new("x")).unwrap_err();
    assert!(matches!(err, GatewayError::Transport(_)), "{err:?}");
}

#[test]
fn slow_endpoint_times_out() {
    let (url, _rx) = serve_once(200, completion("late"), Duration::from_secs(4));
    let gw = HttpGateway::new(&config(&url, 1), prompts(), None);
    let err = gw.rephrase(&RephraseRequest::new("x")).unwrap_err();
    assert!(matches!(err, GatewayError::Transport(_)), "{err:?}");
}
