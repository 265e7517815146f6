//! Chat sessions against a model provider, with JSONL transcripts that can
//! be recorded live and replayed offline.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        })
    }
}

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRecord {
    pub index: usize,
    pub role: Role,
    pub content: String,
    pub model_id: String,
    /// Set on turns recorded from a live provider.
    pub timestamp: Option<DateTime<Utc>>,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("cannot access transcript {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: invalid turn record: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: turn {index} {message}")]
    Sequence {
        path: PathBuf,
        index: usize,
        message: String,
    },
}

/// Read a transcript and check its shape: contiguous indices from 0, and
/// user/assistant alternation after an optional leading system turn.
pub fn read_transcript(path: &Path) -> Result<Vec<TurnRecord>, TranscriptError> {
    let io = |source| TranscriptError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TurnRecord =
            serde_json::from_str(&line).map_err(|e| TranscriptError::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
        records.push(record);
    }
    check_sequence(&records).map_err(|(index, message)| TranscriptError::Sequence {
        path: path.to_path_buf(),
        index,
        message,
    })?;
    Ok(records)
}

fn check_sequence(records: &[TurnRecord]) -> Result<(), (usize, String)> {
    let offset = usize::from(records.first().is_some_and(|r| r.role == Role::System));
    for (i, record) in records.iter().enumerate() {
        if record.index != i {
            return Err((i, format!("has index {}, expected {i}", record.index)));
        }
        if i < offset {
            continue;
        }
        let expected = if (i - offset) % 2 == 0 {
            Role::User
        } else {
            Role::Assistant
        };
        if record.role != expected {
            return Err((i, format!("has role {}, expected {expected}", record.role)));
        }
    }
    Ok(())
}

pub fn write_transcript(path: &Path, records: &[TurnRecord]) -> Result<(), TranscriptError> {
    let io = |source| TranscriptError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("turn records serialize"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io)
}

/// Coarse token estimate: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderExtensions {
    /// JSON pointer to the reply text in the response body.
    pub response_pointer: String,
    /// Request field carrying the output-token limit.
    pub max_tokens_field: String,
    /// Extra fields merged into every request body.
    pub extra_body: serde_json::Map<String, serde_json::Value>,
}

impl Default for ProviderExtensions {
    fn default() -> Self {
        ProviderExtensions {
            response_pointer: "/choices/0/message/content".into(),
            max_tokens_field: "max_tokens".into(),
            extra_body: serde_json::Map::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    /// Chat-completions URL.
    pub endpoint: String,
    pub model_id: String,
    pub max_output_tokens: u32,
    #[serde(default)]
    pub temperature: f64,
    /// Seconds.
    #[serde(default = "default_timeout")]
    pub request_timeout: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    pub credential_env_var: String,
    /// Prompt plus output tokens the model accepts; only used for warnings.
    #[serde(default)]
    pub context_window: Option<usize>,
    #[serde(default)]
    pub extensions: ProviderExtensions,
}

fn default_timeout() -> u64 {
    120
}

fn default_retries() -> u32 {
    3
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_output_tokens == 0 {
            return Err(GatewayError::InvalidConfig(
                "max_output_tokens must be positive".into(),
            ));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(GatewayError::InvalidConfig(
                "temperature must be non-negative".into(),
            ));
        }
        url::Url::parse(&self.endpoint)
            .map_err(|e| GatewayError::InvalidConfig(format!("endpoint: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("provider request failed after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("replay diverged at turn {index}: transcript has `{expected}`, prompt has `{actual}`")]
    ReplayDivergence {
        index: usize,
        expected: String,
        actual: String,
    },
    #[error("replay transcript has no turn {index}")]
    ReplayExhausted { index: usize },
    #[error("credential environment variable `{0}` is not set")]
    CredentialMissing(String),
    #[error("invalid provider configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// A failed provider call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportFailure {
    pub retryable: bool,
    pub message: String,
}

/// Something that turns a conversation into the next assistant reply.
pub trait ChatTransport: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportFailure>;
}

/// OpenAI-style chat-completions over HTTP.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    config: ProviderConfig,
    credential: String,
}

impl HttpTransport {
    /// Fails with `CredentialMissing` before any network use when the
    /// configured variable is unset or empty.
    pub fn new(config: &ProviderConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let credential = std::env::var(&config.credential_env_var)
            .ok()
            .filter(|v| !v.is_empty())
            .ok_or_else(|| GatewayError::CredentialMissing(config.credential_env_var.clone()))?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.request_timeout))
            .build()
            .map_err(|e| GatewayError::InvalidConfig(e.to_string()))?;
        Ok(HttpTransport {
            client,
            config: config.clone(),
            credential,
        })
    }

    fn body(&self, messages: &[ChatMessage]) -> serde_json::Value {
        let mut body = serde_json::Map::new();
        body.insert("model".into(), self.config.model_id.clone().into());
        body.insert(
            "messages".into(),
            serde_json::to_value(messages).expect("messages serialize"),
        );
        body.insert("temperature".into(), self.config.temperature.into());
        body.insert(
            self.config.extensions.max_tokens_field.clone(),
            self.config.max_output_tokens.into(),
        );
        for (k, v) in &self.config.extensions.extra_body {
            body.insert(k.clone(), v.clone());
        }
        serde_json::Value::Object(body)
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportFailure> {
        let response = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.credential)
            .json(&self.body(messages))
            .send()
            .map_err(|e| TransportFailure {
                retryable: true,
                message: e.to_string(),
            })?;
        let status = response.status();
        let text = response.text().map_err(|e| TransportFailure {
            retryable: true,
            message: e.to_string(),
        })?;
        if !status.is_success() {
            return Err(TransportFailure {
                retryable: status.as_u16() == 429 || status.is_server_error(),
                message: format!("HTTP {status}: {}", snippet(&text, 0, 200)),
            });
        }
        let json: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| TransportFailure {
                retryable: false,
                message: format!("response is not JSON: {e}"),
            })?;
        json.pointer(&self.config.extensions.response_pointer)
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| TransportFailure {
                retryable: false,
                message: format!(
                    "no string at {} in response",
                    self.config.extensions.response_pointer
                ),
            })
    }
}

/// Delay before retry number `attempt` (0-based): 1s, 2s, 4s, ... capped at 32s.
pub fn backoff_delay(attempt: u32) -> Duration {
    Duration::from_secs(1u64 << attempt.min(5))
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

enum Mode {
    Live {
        transport: Arc<dyn ChatTransport>,
        record_path: Option<PathBuf>,
        max_retries: u32,
        sleeper: Sleeper,
        context_window: Option<usize>,
        max_output_tokens: usize,
    },
    Replay {
        transcript: Vec<TurnRecord>,
        cursor: usize,
    },
}

/// A single-owner conversation.
pub struct Session {
    mode: Mode,
    model_id: String,
    history: Vec<TurnRecord>,
}

impl fmt::Debug for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Session")
            .field("model_id", &self.model_id)
            .field("turns", &self.history.len())
            .field("replay", &self.is_replay())
            .finish()
    }
}

impl Session {
    /// Live session. With `record_path`, every turn is appended to that file
    /// (which is truncated first).
    pub fn live(
        transport: Arc<dyn ChatTransport>,
        config: &ProviderConfig,
        record_path: Option<PathBuf>,
    ) -> Result<Self, GatewayError> {
        if let Some(path) = &record_path {
            File::create(path).map_err(|source| TranscriptError::Io {
                path: path.clone(),
                source,
            })?;
        }
        Ok(Session {
            mode: Mode::Live {
                transport,
                record_path,
                max_retries: config.max_retries,
                sleeper: Arc::new(std::thread::sleep),
                context_window: config.context_window,
                max_output_tokens: config.max_output_tokens as usize,
            },
            model_id: config.model_id.clone(),
            history: Vec::new(),
        })
    }

    /// Replay session over recorded turns. A leading system turn is taken
    /// into the history as is.
    pub fn replay(transcript: Vec<TurnRecord>) -> Self {
        let model_id = transcript
            .iter()
            .find(|r| r.role == Role::Assistant)
            .map(|r| r.model_id.clone())
            .unwrap_or_default();
        let mut history = Vec::new();
        let mut cursor = 0;
        if let Some(first) = transcript.first().filter(|r| r.role == Role::System) {
            history.push(first.clone());
            cursor = 1;
        }
        Session {
            mode: Mode::Replay { transcript, cursor },
            model_id,
            history,
        }
    }

    pub fn replay_file(path: &Path) -> Result<Self, GatewayError> {
        Ok(Self::replay(read_transcript(path)?))
    }

    /// Replace the sleep used between retries (tests use a no-op).
    pub fn with_sleeper(mut self, f: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        if let Mode::Live { sleeper, .. } = &mut self.mode {
            *sleeper = Arc::new(f);
        }
        self
    }

    pub fn is_replay(&self) -> bool {
        matches!(self.mode, Mode::Replay { .. })
    }

    pub fn history(&self) -> &[TurnRecord] {
        &self.history
    }

    /// Turns of the transcript not yet consumed (replay only).
    pub fn remaining(&self) -> usize {
        match &self.mode {
            Mode::Replay { transcript, cursor } => transcript.len() - cursor,
            Mode::Live { .. } => 0,
        }
    }

    /// Send `prompt` and return the assistant reply.
    pub fn send(&mut self, prompt: &str) -> Result<String, GatewayError> {
        let reply = match &mut self.mode {
            Mode::Replay { transcript, cursor } => {
                let index = *cursor;
                let user = transcript
                    .get(index)
                    .ok_or(GatewayError::ReplayExhausted { index })?;
                if user.role != Role::User || user.content != prompt {
                    let at = first_difference(&user.content, prompt);
                    return Err(GatewayError::ReplayDivergence {
                        index,
                        expected: snippet(&user.content, at, 60),
                        actual: snippet(prompt, at, 60),
                    });
                }
                let assistant = transcript
                    .get(index + 1)
                    .filter(|r| r.role == Role::Assistant)
                    .ok_or(GatewayError::ReplayExhausted { index: index + 1 })?;
                *cursor += 2;
                self.history.push(user.clone());
                self.history.push(assistant.clone());
                return Ok(assistant.content.clone());
            }
            Mode::Live {
                transport,
                max_retries,
                sleeper,
                context_window,
                max_output_tokens,
                ..
            } => {
                if let Some(window) = context_window {
                    let needed: usize = self
                        .history
                        .iter()
                        .map(|r| estimate_tokens(&r.content))
                        .sum::<usize>()
                        + estimate_tokens(prompt)
                        + *max_output_tokens;
                    if needed > *window {
                        tracing::warn!(
                            needed,
                            window = *window,
                            "conversation may exceed the context window"
                        );
                    }
                }
                let mut messages: Vec<ChatMessage> = self
                    .history
                    .iter()
                    .map(|r| ChatMessage {
                        role: r.role,
                        content: r.content.clone(),
                    })
                    .collect();
                messages.push(ChatMessage {
                    role: Role::User,
                    content: prompt.to_string(),
                });
                let mut attempt = 0;
                loop {
                    match transport.complete(&messages) {
                        Ok(reply) => break reply,
                        Err(failure) if failure.retryable && attempt < *max_retries => {
                            tracing::warn!(attempt, error = %failure.message, "retrying provider call");
                            sleeper(backoff_delay(attempt));
                            attempt += 1;
                        }
                        Err(failure) => {
                            return Err(GatewayError::Transport {
                                attempts: attempt + 1,
                                message: failure.message,
                            })
                        }
                    }
                }
            }
        };
        let now = Some(Utc::now());
        let user = TurnRecord {
            index: self.history.len(),
            role: Role::User,
            content: prompt.to_string(),
            model_id: self.model_id.clone(),
            timestamp: now,
        };
        let assistant = TurnRecord {
            index: self.history.len() + 1,
            role: Role::Assistant,
            content: reply.clone(),
            model_id: self.model_id.clone(),
            timestamp: now,
        };
        if let Mode::Live {
            record_path: Some(path),
            ..
        } = &self.mode
        {
            append_records(path, &[&user, &assistant])?;
        }
        self.history.push(user);
        self.history.push(assistant);
        Ok(reply)
    }
}

fn append_records(path: &Path, records: &[&TurnRecord]) -> Result<(), TranscriptError> {
    let io = |source| TranscriptError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = OpenOptions::new()
        .append(true)
        .create(true)
        .open(path)
        .map_err(io)?;
    for r in records {
        let line = serde_json::to_string(r).expect("turn records serialize");
        writeln!(file, "{line}").map_err(io)?;
    }
    file.flush().map_err(io)
}

fn first_difference(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

/// Up to `len` characters starting a little before character `at`.
fn snippet(text: &str, at: usize, len: usize) -> String {
    let start = at.saturating_sub(10);
    text.chars().skip(start).take(len).collect()
}
