//! Two-stage generation of the LLM side of the training corpus.
//!
//! Stage one compresses a human document into a bullet-point skeleton;
//! stage two expands the skeleton back into full text. Both stages go
//! through a [`GenClient`], which either talks to a chat-completion endpoint
//! (`live`) or applies a fixed deterministic rewrite (`mock`) without ever
//! opening a socket.
//!
//! Live requests pass through a disk cache, a rate limiter and a retry loop,
//! in that order. The API key is read only from the configured environment
//! variable.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Corpus, Document, Meta};
use crate::error::{Error, Result};
use crate::text::{segment_sentences, tokenize};

/// Stage-one instruction (skeleton extraction), verbatim.
pub const SKELETON_PROMPT: &str = include_str!("../resources/prompts/skeleton.txt");
/// Stage-two instruction (expansion), verbatim.
pub const EXPAND_PROMPT: &str = include_str!("../resources/prompts/expand.txt");

/// Word substitutions applied by the mock expander.
pub const SUBSTITUTIONS: [(&str, &str); 20] = [
    ("use", "utilize"),
    ("help", "assist"),
    ("show", "demonstrate"),
    ("start", "commence"),
    ("end", "conclude"),
    ("buy", "purchase"),
    ("get", "obtain"),
    ("need", "require"),
    ("try", "endeavor"),
    ("ask", "inquire"),
    ("tell", "inform"),
    ("big", "substantial"),
    ("many", "numerous"),
    ("fix", "rectify"),
    ("keep", "maintain"),
    ("give", "provide"),
    ("find", "discover"),
    ("choose", "select"),
    ("about", "regarding"),
    ("enough", "sufficient"),
];

/// Appended to every bullet by the mock expander.
pub const MOCK_FILLER: &str = "which is notably comprehensive";

const MOCK_BULLET_TOKENS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptPair {
    pub skeleton: String,
    pub expand: String,
}

impl Default for PromptPair {
    fn default() -> Self {
        PromptPair {
            skeleton: SKELETON_PROMPT.to_string(),
            expand: EXPAND_PROMPT.to_string(),
        }
    }
}

impl PromptPair {
    pub fn from_files(skeleton: impl AsRef<Path>, expand: impl AsRef<Path>) -> Result<Self> {
        Ok(PromptPair {
            skeleton: std::fs::read_to_string(skeleton)?,
            expand: std::fs::read_to_string(expand)?,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenMode {
    Live,
    #[default]
    Mock,
}

impl std::str::FromStr for GenMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(GenMode::Live),
            "mock" => Ok(GenMode::Mock),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenClientConfig {
    pub endpoint_url: String,
    pub model_id: String,
    pub api_key_env_var: String,
    pub max_concurrent: usize,
    pub requests_per_minute: u32,
    pub cache_dir: Option<PathBuf>,
    pub mode: GenMode,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for GenClientConfig {
    fn default() -> Self {
        GenClientConfig {
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_id: "gpt-3.5-turbo".into(),
            api_key_env_var: "OPENAI_API_KEY".into(),
            max_concurrent: 4,
            requests_per_minute: 60,
            cache_dir: None,
            mode: GenMode::Mock,
            max_retries: 5,
            backoff_ms: 500,
            timeout_secs: 120,
        }
    }
}

impl GenClientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_concurrent < 1 || self.requests_per_minute < 1 {
            return Err(Error::InvalidArgument(
                "max_concurrent and requests_per_minute must be >= 1".into(),
            ));
        }
        if self.mode == GenMode::Live && self.endpoint_url.is_empty() {
            return Err(Error::InvalidArgument(
                "live mode needs endpoint_url".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    fn new(model: &str, instruction: &str, input: &str) -> Self {
        ChatRequest {
            model: model.to_string(),
            messages: vec![
                ChatMessage {
                    role: "system".into(),
                    content: instruction.to_string(),
                },
                ChatMessage {
                    role: "user".into(),
                    content: input.to_string(),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportFailure {
    /// Network or server-side failure; worth retrying.
    Retryable(String),
    RateLimited {
        retry_after: Option<Duration>,
    },
    /// Client-side failure that a retry cannot fix.
    Fatal(String),
}

/// Sends one chat-completion request and returns the first choice's text.
pub trait ChatTransport: Send + Sync {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportFailure>;
}

/// Extracts `choices[0].message.content` from a chat-completion response.
pub fn parse_completion(body: &str) -> std::result::Result<String, TransportFailure> {
    let v: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| TransportFailure::Fatal(format!("response is not JSON: {e}")))?;
    match v.pointer("/choices/0/message/content") {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(serde_json::Value::Null) | None if v.pointer("/choices/0").is_some() => {
            Ok(String::new())
        }
        _ => Err(TransportFailure::Fatal("response has no choices".into())),
    }
}

pub struct HttpTransport {
    agent: ureq::Agent,
    url: String,
    api_key: String,
}

impl HttpTransport {
    pub fn new(url: &str, api_key: String, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpTransport {
            agent,
            url: url.to_string(),
            api_key,
        }
    }
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportFailure> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(request)
            .map_err(|e| TransportFailure::Retryable(e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 {
            let retry_after = resp
                .headers()
                .get("retry-after")
                .and_then(|h| h.to_str().ok())
                .and_then(|s| s.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(TransportFailure::RateLimited { retry_after });
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportFailure::Retryable(e.to_string()))?;
        match status {
            200..=299 => parse_completion(&body),
            500..=599 => Err(TransportFailure::Retryable(format!("HTTP {status}"))),
            _ => Err(TransportFailure::Fatal(format!("HTTP {status}: {body}"))),
        }
    }
}

/// Spaces requests evenly at `requests_per_minute`; callers over the rate
/// wait their turn.
pub struct RateLimiter {
    interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(requests_per_minute: u32) -> Self {
        RateLimiter {
            interval: Duration::from_secs(60) / requests_per_minute.max(1),
            next_slot: Mutex::new(None),
        }
    }

    pub fn acquire(&self) {
        let slot = {
            let mut next = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

/// Cache file name: hex SHA-256 over length-prefixed model id, prompt, input.
pub fn cache_key(text: &str, prompt: &str, model_id: &str) -> String {
    let mut h = Sha256::new();
    for part in [model_id, prompt, text] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    use std::io::Write;
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(dir.join(name))
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

enum Backend {
    Mock,
    Live(Box<dyn ChatTransport>),
}

pub struct GenClient {
    cfg: GenClientConfig,
    prompts: PromptPair,
    backend: Backend,
    limiter: RateLimiter,
    network_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl GenClient {
    /// Builds a client. Live mode resolves the API key from the configured
    /// environment variable; mock mode creates no transport at all.
    pub fn new(cfg: GenClientConfig, prompts: PromptPair) -> Result<Self> {
        cfg.validate()?;
        let backend = match cfg.mode {
            GenMode::Mock => Backend::Mock,
            GenMode::Live => {
                let key = std::env::var(&cfg.api_key_env_var).map_err(|_| {
                    Error::InvalidArgument(format!(
                        "environment variable {} is not set",
                        cfg.api_key_env_var
                    ))
                })?;
                Backend::Live(Box::new(HttpTransport::new(
                    &cfg.endpoint_url,
                    key,
                    Duration::from_secs(cfg.timeout_secs),
                )))
            }
        };
        Ok(Self::assemble(cfg, prompts, backend))
    }

    /// Live-mode client over a caller-supplied transport.
    pub fn with_transport(
        mut cfg: GenClientConfig,
        prompts: PromptPair,
        transport: Box<dyn ChatTransport>,
    ) -> Self {
        cfg.mode = GenMode::Live;
        Self::assemble(cfg, prompts, Backend::Live(transport))
    }

    fn assemble(cfg: GenClientConfig, prompts: PromptPair, backend: Backend) -> Self {
        GenClient {
            limiter: RateLimiter::new(cfg.requests_per_minute),
            cfg,
            prompts,
            backend,
            network_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn config(&self) -> &GenClientConfig {
        &self.cfg
    }

    pub fn prompts(&self) -> &PromptPair {
        &self.prompts
    }

    /// Requests handed to the transport (including retries).
    pub fn network_calls(&self) -> u64 {
        self.network_calls.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }

    fn complete(&self, transport: &dyn ChatTransport, prompt: &str, input: &str) -> Result<String> {
        let key = cache_key(input, prompt, &self.cfg.model_id);
        let file = format!("{key}.txt");
        if let Some(dir) = &self.cfg.cache_dir {
            if let Ok(hit) = std::fs::read_to_string(dir.join(&file)) {
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(hit);
            }
        }
        let request = ChatRequest::new(&self.cfg.model_id, prompt, input);
        let mut attempt = 0;
        let text = loop {
            self.limiter.acquire();
            self.network_calls.fetch_add(1, Ordering::Relaxed);
            let backoff =
                Duration::from_millis(self.cfg.backoff_ms.saturating_mul(1 << attempt.min(16)));
            match transport.send(&request) {
                Ok(text) => break text,
                Err(TransportFailure::Fatal(m)) => return Err(Error::Transport(m)),
                Err(failure) if attempt >= self.cfg.max_retries => {
                    return Err(match failure {
                        TransportFailure::RateLimited { .. } => Error::RateLimited,
                        TransportFailure::Retryable(m) | TransportFailure::Fatal(m) => {
                            Error::Transport(m)
                        }
                    })
                }
                Err(TransportFailure::RateLimited { retry_after }) => {
                    std::thread::sleep(retry_after.unwrap_or(backoff));
                }
                Err(TransportFailure::Retryable(_)) => std::thread::sleep(backoff),
            }
            attempt += 1;
        };
        if text.trim().is_empty() {
            return Err(Error::EmptyResponse);
        }
        if let Some(dir) = &self.cfg.cache_dir {
            write_atomic(dir, &file, &text)?;
        }
        Ok(text)
    }
}

/// Bullet-point outline of one source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub source_id: String,
    pub bullets: Vec<String>,
    /// Carried through so the expanded document keeps the source's date.
    pub date: chrono::NaiveDate,
    pub meta: Meta,
}

/// Lines that start with a bullet marker (`-`, `*`, `•`, `–`, `1.`, `1)`),
/// with the marker stripped.
pub fn parse_bullets(response: &str) -> Vec<String> {
    response
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            let rest = ['-', '*', '•', '–', '—']
                .iter()
                .find_map(|m| line.strip_prefix(*m))
                .or_else(|| {
                    let digits = line.chars().take_while(char::is_ascii_digit).count();
                    if digits == 0 {
                        return None;
                    }
                    line[digits..]
                        .strip_prefix('.')
                        .or_else(|| line[digits..].strip_prefix(')'))
                })?;
            let rest = rest.trim();
            (!rest.is_empty()).then(|| rest.to_string())
        })
        .collect()
}

fn mock_bullets(text: &str) -> Vec<String> {
    segment_sentences(text)
        .iter()
        .map(|s| {
            tokenize(s)
                .into_iter()
                .take(MOCK_BULLET_TOKENS)
                .collect::<Vec<_>>()
                .join(" ")
        })
        .filter(|b| !b.is_empty())
        .collect()
}

fn substitute(word: &str) -> &str {
    SUBSTITUTIONS
        .iter()
        .find(|(from, _)| *from == word)
        .map_or(word, |(_, to)| to)
}

fn mock_expand(bullets: &[String]) -> String {
    let sentences: Vec<String> = bullets
        .iter()
        .map(|b| {
            let words: Vec<&str> = b.split_whitespace().map(substitute).collect();
            format!("{} {MOCK_FILLER}", words.join(" "))
        })
        .collect();
    format!("{}.", sentences.join(". "))
}

pub fn skeletonize(doc: &Document, client: &GenClient) -> Result<Skeleton> {
    if doc.text.trim().is_empty() {
        return Err(Error::InvalidArgument(format!(
            "document {:?} has no text",
            doc.id
        )));
    }
    let bullets = match &client.backend {
        Backend::Mock => mock_bullets(&doc.text),
        Backend::Live(t) => {
            parse_bullets(&client.complete(t.as_ref(), &client.prompts.skeleton, &doc.text)?)
        }
    };
    if bullets.is_empty() {
        return Err(Error::InvalidSkeleton(doc.id.clone()));
    }
    Ok(Skeleton {
        source_id: doc.id.clone(),
        bullets,
        date: doc.date,
        meta: doc.meta.clone(),
    })
}

pub fn expand(skeleton: &Skeleton, client: &GenClient) -> Result<Document> {
    if skeleton.bullets.is_empty() || skeleton.bullets.iter().any(|b| b.trim().is_empty()) {
        return Err(Error::InvalidSkeleton(skeleton.source_id.clone()));
    }
    let text = match &client.backend {
        Backend::Mock => mock_expand(&skeleton.bullets),
        Backend::Live(t) => {
            let outline: String = skeleton
                .bullets
                .iter()
                .map(|b| format!("- {b}\n"))
                .collect();
            client
                .complete(t.as_ref(), &client.prompts.expand, &outline)?
                .trim()
                .to_string()
        }
    };
    let mut meta = skeleton.meta.clone();
    meta.insert("generator".into(), client.cfg.model_id.clone());
    Ok(Document {
        id: format!("{}#llm", skeleton.source_id),
        text,
        date: skeleton.date,
        meta,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenFailure {
    pub id: String,
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct GenerationReport {
    pub corpus: Corpus,
    pub failures: Vec<GenFailure>,
}

/// Skeletonizes and expands every document with at most `max_concurrent`
/// requests in flight. Output order follows input order; per-document
/// failures are collected.
pub fn generate_parallel_corpus(corpus: &Corpus, client: &GenClient) -> Result<GenerationReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let docs = corpus.docs();
    let slots: Vec<Mutex<Option<Result<Document>>>> =
        docs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = client.cfg.max_concurrent.min(docs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(doc) = docs.get(i) else { break };
                let out = skeletonize(doc, client).and_then(|s| expand(&s, client));
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(out);
            });
        }
    });

    let mut generated = Vec::with_capacity(docs.len());
    let mut failures = Vec::new();
    for (doc, slot) in docs.iter().zip(slots) {
        match slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
            Some(Ok(d)) => generated.push(d),
            Some(Err(e)) => failures.push(GenFailure {
                id: doc.id.clone(),
                kind: e.kind().to_string(),
                message: e.to_string(),
            }),
            None => unreachable!("every document is processed"),
        }
    }
    if generated.is_empty() {
        return Err(Error::AllFailed(failures.len()));
    }
    let label = format!(
        "generated({}, {})",
        client.cfg.model_id,
        corpus.source_label()
    );
    Ok(GenerationReport {
        corpus: Corpus::new(generated, label)?,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use std::sync::Arc;

    fn doc(id: &str, text: &str) -> Document {
        Document::new(id, text, NaiveDate::from_ymd_opt(2021, 4, 2).unwrap())
            .with_meta("state", "CA")
    }

    fn mock() -> GenClient {
        GenClient::new(GenClientConfig::default(), PromptPair::default()).unwrap()
    }

    /// Scripted transport: answers by looking at the request, counts calls.
    struct Scripted<
        F: Fn(&ChatRequest) -> std::result::Result<String, TransportFailure> + Send + Sync,
    > {
        f: F,
        calls: Arc<AtomicU64>,
    }

    impl<F> ChatTransport for Scripted<F>
    where
        F: Fn(&ChatRequest) -> std::result::Result<String, TransportFailure> + Send + Sync,
    {
        fn send(&self, r: &ChatRequest) -> std::result::Result<String, TransportFailure> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            (self.f)(r)
        }
    }

    fn live<F>(cfg: GenClientConfig, f: F) -> (GenClient, Arc<AtomicU64>)
    where
        F: Fn(&ChatRequest) -> std::result::Result<String, TransportFailure>
            + Send
            + Sync
            + 'static,
    {
        let calls = Arc::new(AtomicU64::new(0));
        let t = Scripted {
            f,
            calls: calls.clone(),
        };
        let cfg = GenClientConfig {
            requests_per_minute: 60_000,
            backoff_ms: 1,
            ..cfg
        };
        (
            GenClient::with_transport(cfg, PromptPair::default(), Box::new(t)),
            calls,
        )
    }

    fn echo_bullets(r: &ChatRequest) -> std::result::Result<String, TransportFailure> {
        if r.messages[0].content == SKELETON_PROMPT {
            Ok(format!("- {}\n- second point", r.messages[1].content))
        } else {
            Ok(format!(
                "Expanded: {}",
                r.messages[1].content.replace('\n', " ")
            ))
        }
    }

    #[test]
    fn mock_skeleton_rule() {
        let s = skeletonize(&doc("d1", "Hello world today. Bye now."), &mock()).unwrap();
        assert_eq!(s.bullets, ["hello world today", "bye now"]);
        let s = skeletonize(&doc("d1", "One two three four five six seven."), &mock()).unwrap();
        assert_eq!(s.bullets, ["one two three four five"]);
    }

    #[test]
    fn mock_expand_rule() {
        let s = skeletonize(&doc("d1", "We use it. Many help."), &mock()).unwrap();
        let d = expand(&s, &mock()).unwrap();
        assert_eq!(
            d.text,
            "we utilize it which is notably comprehensive. numerous assist which is notably comprehensive."
        );
        assert_eq!(d.id, "d1#llm");
        assert_eq!(d.date, NaiveDate::from_ymd_opt(2021, 4, 2).unwrap());
        assert_eq!(d.meta["generator"], "gpt-3.5-turbo");
        assert_eq!(d.meta["state"], "CA");
        assert_eq!(expand(&s, &mock()).unwrap(), d);
    }

    #[test]
    fn empty_skeleton_is_invalid() {
        let s = Skeleton {
            source_id: "x".into(),
            bullets: vec![],
            date: NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
            meta: Meta::new(),
        };
        assert!(matches!(
            expand(&s, &mock()),
            Err(Error::InvalidSkeleton(_))
        ));
        assert!(matches!(
            skeletonize(&doc("p", "?!"), &mock()),
            Err(Error::InvalidSkeleton(_))
        ));
    }

    #[test]
    fn bullet_parsing() {
        let r = "Here you go:\n- first\n* second\n• third\n1. fourth\n2) fifth\n-\nplain";
        assert_eq!(
            parse_bullets(r),
            ["first", "second", "third", "fourth", "fifth"]
        );
    }

    #[test]
    fn completion_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(parse_completion(ok).unwrap(), "hi");
        let empty = r#"{"choices":[{"message":{"role":"assistant","content":null}}]}"#;
        assert_eq!(parse_completion(empty).unwrap(), "");
        assert!(matches!(
            parse_completion("{}"),
            Err(TransportFailure::Fatal(_))
        ));
    }

    #[test]
    fn live_round_trip_and_cache() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenClientConfig {
            cache_dir: Some(dir.path().to_path_buf()),
            ..GenClientConfig::default()
        };
        let (client, calls) = live(cfg, echo_bullets);
        let d = doc("a", "Source text");
        let out = expand(&skeletonize(&d, &client).unwrap(), &client).unwrap();
        assert_eq!(out.id, "a#llm");
        assert_eq!(out.text, "Expanded: - Source text - second point");
        assert_eq!(calls.load(Ordering::SeqCst), 2);

        let again = expand(&skeletonize(&d, &client).unwrap(), &client).unwrap();
        assert_eq!(again, out);
        assert_eq!(calls.load(Ordering::SeqCst), 2);
        assert_eq!(client.cache_hits(), 2);
        let files = std::fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(files, 2);
    }

    #[test]
    fn cache_key_tracks_each_input() {
        let base = cache_key("text", "prompt", "m");
        assert_eq!(base, cache_key("text", "prompt", "m"));
        assert_ne!(base, cache_key("text2", "prompt", "m"));
        assert_ne!(base, cache_key("text", "prompt2", "m"));
        assert_ne!(base, cache_key("text", "prompt", "m2"));
        assert_ne!(cache_key("ab", "c", "m"), cache_key("a", "bc", "m"));
        assert_eq!(base.len(), 64);
    }

    #[test]
    fn empty_response() {
        let (client, _) = live(GenClientConfig::default(), |_| Ok("   ".into()));
        assert!(matches!(
            skeletonize(&doc("a", "x"), &client),
            Err(Error::EmptyResponse)
        ));
    }

    #[test]
    fn retries_then_succeeds() {
        let n = Arc::new(AtomicU64::new(0));
        let n2 = n.clone();
        let (client, calls) = live(GenClientConfig::default(), move |r| {
            if n2.fetch_add(1, Ordering::SeqCst) < 3 {
                Err(TransportFailure::Retryable("boom".into()))
            } else {
                echo_bullets(r)
            }
        });
        assert!(skeletonize(&doc("a", "x"), &client).is_ok());
        assert_eq!(calls.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn retries_are_bounded() {
        let (client, calls) = live(GenClientConfig::default(), |_| {
            Err(TransportFailure::Retryable("down".into()))
        });
        assert!(matches!(
            skeletonize(&doc("a", "x"), &client),
            Err(Error::Transport(_))
        ));
        assert_eq!(calls.load(Ordering::SeqCst), 6);

        let (client, _) = live(GenClientConfig::default(), |_| {
            Err(TransportFailure::RateLimited {
                retry_after: Some(Duration::from_millis(1)),
            })
        });
        assert!(matches!(
            skeletonize(&doc("a", "x"), &client),
            Err(Error::RateLimited)
        ));

        let (client, calls) = live(GenClientConfig::default(), |_| {
            Err(TransportFailure::Fatal("401".into()))
        });
        assert!(matches!(
            skeletonize(&doc("a", "x"), &client),
            Err(Error::Transport(_))
        ));
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn partial_failures_are_collected() {
        let (client, _) = live(GenClientConfig::default(), |r| {
            if r.messages[1].content.contains("second") && r.messages[0].content == SKELETON_PROMPT
            {
                Ok(String::new())
            } else {
                echo_bullets(r)
            }
        });
        let c = Corpus::new(
            vec![
                doc("d1", "first doc"),
                doc("d2", "second doc"),
                doc("d3", "third doc"),
            ],
            "three",
        )
        .unwrap();
        let report = generate_parallel_corpus(&c, &client).unwrap();
        assert_eq!(
            report.corpus.ids().collect::<Vec<_>>(),
            ["d1#llm", "d3#llm"]
        );
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].id, "d2");
        assert_eq!(report.failures[0].kind, "EmptyResponse");
    }

    #[test]
    fn all_failures_is_an_error() {
        let (client, _) = live(GenClientConfig::default(), |_| Ok(String::new()));
        let c = Corpus::new(vec![doc("d1", "x")], "one").unwrap();
        assert!(matches!(
            generate_parallel_corpus(&c, &client),
            Err(Error::AllFailed(1))
        ));
    }

    #[test]
    fn mock_corpus_is_deterministic_and_ordered() {
        let docs: Vec<Document> = (0..100)
            .map(|i| {
                doc(
                    &format!("d{i:03}"),
                    &format!("Document number {i} says hello. It ends."),
                )
            })
            .collect();
        let c = Corpus::new(docs, "many").unwrap();
        let cfg = GenClientConfig {
            max_concurrent: 7,
            ..GenClientConfig::default()
        };
        let client = GenClient::new(cfg, PromptPair::default()).unwrap();
        let a = generate_parallel_corpus(&c, &client).unwrap();
        let b = generate_parallel_corpus(&c, &mock()).unwrap();
        assert_eq!(a.corpus.docs(), b.corpus.docs());
        assert_eq!(a.corpus.len(), 100);
        for (src, out) in c.docs().iter().zip(a.corpus.docs()) {
            assert_eq!(out.id, format!("{}#llm", src.id));
        }
        assert_eq!(client.network_calls(), 0);
    }

    #[test]
    fn live_mode_requires_key_variable() {
        let cfg = GenClientConfig {
            mode: GenMode::Live,
            api_key_env_var: "LLMFRAC_TEST_SURELY_UNSET_KEY".into(),
            ..GenClientConfig::default()
        };
        assert!(matches!(
            GenClient::new(cfg, PromptPair::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let limiter = RateLimiter::new(600);
        let start = Instant::now();
        for _ in 0..4 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(300));
    }
}
