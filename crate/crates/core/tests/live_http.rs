//! Live-mode client against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use chrono::NaiveDate;
use llmfrac::corpus::Document;
use llmfrac::generation::{
    expand, skeletonize, GenClient, GenClientConfig, GenMode, PromptPair, EXPAND_PROMPT,
    SKELETON_PROMPT,
};
use llmfrac::Error;

struct Recorded {
    path: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

fn read_request(stream: &mut TcpStream) -> Recorded {
    let mut reader = BufReader::new(stream);
    let mut request_line = String::new();
    reader.read_line(&mut request_line).unwrap();
    let path = request_line
        .split_whitespace()
        .nth(1)
        .unwrap_or("")
        .to_string();
    let (mut length, mut authorization) = (0usize, None);
    loop {
        let mut line = String::new();
        reader.read_line(&mut line).unwrap();
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        let (name, value) = line.split_once(':').unwrap();
        match name.to_ascii_lowercase().as_str() {
            "content-length" => length = value.trim().parse().unwrap(),
            "authorization" => authorization = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    Recorded {
        path,
        authorization,
        body: serde_json::from_slice(&body).unwrap(),
    }
}

fn completion(text: &str) -> (u16, String) {
    (
        200,
        serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]})
            .to_string(),
    )
}

/// Serves the scripted responses in order, one per connection.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Recorded>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!(
        "http://{}/v1/chat/completions",
        listener.local_addr().unwrap()
    );
    let log = Arc::new(Mutex::new(Vec::new()));
    let sink = Arc::clone(&log);
    thread::spawn(move || {
        for (status, body) in script {
            let (mut stream, _) = listener.accept().unwrap();
            let rec = read_request(&mut stream);
            sink.lock().unwrap().push(rec);
            let reason = if status == 200 { "OK" } else { "Error" };
            let extra = if status == 429 {
                "Retry-After: 0\r\n"
            } else {
                ""
            };
            write!(
                stream,
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\n{extra}Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, log)
}

fn config(url: &str, key_var: &str, cache: Option<&std::path::Path>) -> GenClientConfig {
    GenClientConfig {
        endpoint_url: url.to_string(),
        model_id: "test-model".into(),
        api_key_env_var: key_var.into(),
        mode: GenMode::Live,
        requests_per_minute: 60_000,
        backoff_ms: 1,
        cache_dir: cache.map(|p| p.to_path_buf()),
        ..GenClientConfig::default()
    }
}

fn doc() -> Document {
    Document::new(
        "d1",
        "We use tools. They help a lot.",
        NaiveDate::from_ymd_opt(2021, 5, 1).unwrap(),
    )
    .with_meta("source", "test")
}

#[test]
fn wire_format_retries_and_cache() {
    std::env::set_var("LLMFRAC_TEST_KEY_WIRE", "sk-test");
    let cache = tempfile::tempdir().unwrap();
    let (url, log) = serve(vec![
        (429, "{}".into()),
        (503, "{}".into()),
        completion("- first point\n- second point\nnot a bullet"),
        completion("Expanded text about the points."),
    ]);
    let client = GenClient::new(
        config(&url, "LLMFRAC_TEST_KEY_WIRE", Some(cache.path())),
        PromptPair::default(),
    )
    .unwrap();

    let skeleton = skeletonize(&doc(), &client).unwrap();
    assert_eq!(skeleton.bullets, ["first point", "second point"]);
    let out = expand(&skeleton, &client).unwrap();
    assert_eq!(out.id, "d1#llm");
    assert_eq!(out.text, "Expanded text about the points.");
    assert_eq!(out.meta["generator"], "test-model");
    assert_eq!(client.network_calls(), 4);

    let log = log.lock().unwrap();
    assert_eq!(log.len(), 4);
    for r in log.iter() {
        assert_eq!(r.path, "/v1/chat/completions");
        assert_eq!(r.authorization.as_deref(), Some("Bearer sk-test"));
        assert_eq!(r.body["model"], "test-model");
    }
    let messages = log[2].body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 2);
    assert_eq!(messages[0]["role"], "system");
    assert_eq!(messages[0]["content"], SKELETON_PROMPT);
    assert_eq!(messages[1]["role"], "user");
    assert_eq!(messages[1]["content"], "We use tools. They help a lot.");
    assert_eq!(log[3].body["messages"][0]["content"], EXPAND_PROMPT);
    drop(log);

    // Same inputs again: both stages come from the cache.
    let again = expand(&skeletonize(&doc(), &client).unwrap(), &client).unwrap();
    assert_eq!(again, out);
    assert_eq!(client.network_calls(), 4);
    assert_eq!(client.cache_hits(), 2);
    let cached = std::fs::read_dir(cache.path()).unwrap().count();
    assert_eq!(cached, 2);
}

#[test]
fn empty_and_fatal_responses() {
    std::env::set_var("LLMFRAC_TEST_KEY_EMPTY", "k");
    let (url, _log) = serve(vec![completion("   "), (400, r#"{"error":"bad"}"#.into())]);
    let client = GenClient::new(
        config(&url, "LLMFRAC_TEST_KEY_EMPTY", None),
        PromptPair::default(),
    )
    .unwrap();
    assert!(matches!(
        skeletonize(&doc(), &client),
        Err(Error::EmptyResponse)
    ));
    assert!(matches!(
        skeletonize(&doc(), &client),
        Err(Error::Transport(_))
    ));
    assert_eq!(client.network_calls(), 2);
}

#[test]
fn exhausted_retries_report_rate_limit() {
    std::env::set_var("LLMFRAC_TEST_KEY_RL", "k");
    let (url, log) = serve(vec![(429, "{}".into()); 6]);
    let client = GenClient::new(
        config(&url, "LLMFRAC_TEST_KEY_RL", None),
        PromptPair::default(),
    )
    .unwrap();
    assert!(matches!(
        skeletonize(&doc(), &client),
        Err(Error::RateLimited)
    ));
    assert_eq!(log.lock().unwrap().len(), 6);
}

#[test]
fn live_mode_needs_the_key_variable() {
    let cfg = config("http://127.0.0.1:9/", "LLMFRAC_TEST_KEY_UNSET_XYZ", None);
    assert!(matches!(
        GenClient::new(cfg, PromptPair::default()),
        Err(Error::InvalidArgument(_))
    ));
}
