//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use ontogen::gateway::{read_transcript, ChatMessage, ChatTransport, Role, TransportFailure};
use ontogen::pipeline::RunConfig;
use ontogen::prompt::parse_fragment;
use ontogen::OntologyGraph;

/// Returns canned replies in order and fails once they run out.
pub struct ScriptedTransport {
    replies: Mutex<VecDeque<String>>,
}

impl ScriptedTransport {
    pub fn new(replies: Vec<String>) -> Self {
        ScriptedTransport {
            replies: Mutex::new(replies.into()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().unwrap().len()
    }
}

impl ChatTransport for ScriptedTransport {
    fn complete(&self, _messages: &[ChatMessage]) -> Result<String, TransportFailure> {
        self.replies
            .lock()
            .unwrap()
            .pop_front()
            .ok_or(TransportFailure {
                retryable: false,
                message: "no scripted reply left".into(),
            })
    }
}

/// Fails `failures` times with the given retryability, then answers.
pub struct FlakyTransport {
    pub failures: usize,
    pub retryable: bool,
    pub calls: AtomicUsize,
}

impl FlakyTransport {
    pub fn new(failures: usize, retryable: bool) -> Self {
        FlakyTransport {
            failures,
            retryable,
            calls: AtomicUsize::new(0),
        }
    }
}

impl ChatTransport for FlakyTransport {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportFailure> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        if n < self.failures {
            return Err(TransportFailure {
                retryable: self.retryable,
                message: format!("simulated failure {}", n + 1),
            });
        }
        Ok(format!("reply to {} message(s)", messages.len()))
    }
}

pub fn fixture_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Replay config of a fixture, writing into `output_dir`.
pub fn replay_config(name: &str, output_dir: &Path) -> RunConfig {
    let mut config = RunConfig::load(&fixture_dir(name).join("run.toml")).unwrap();
    config.output_dir = output_dir.to_path_buf();
    config
}

pub mod corpus;
pub mod gen;
pub mod oracle;

/// Union of the Turtle replies recorded in a generation transcript: what the
/// model produced before any correction round.
pub fn generated_before_corrections(transcript: &Path) -> OntologyGraph {
    let turns = read_transcript(transcript).unwrap();
    let mut graph = OntologyGraph::new();
    for reply in turns.iter().filter(|t| t.role == Role::Assistant) {
        if let Ok(fragment) = parse_fragment(&graph, &reply.content) {
            if !fragment.is_empty() {
                graph.absorb(&fragment).unwrap();
            }
        }
    }
    graph
}
