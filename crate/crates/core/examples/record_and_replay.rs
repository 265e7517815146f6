//! Record a conversation with a chat transport, then replay it offline.

use std::sync::Arc;

use ontogen::gateway::{ChatMessage, ChatTransport, ProviderConfig, Session, TransportFailure};

/// Answers every prompt by echoing its length.
struct Echo;

impl ChatTransport for Echo {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportFailure> {
        let last = messages.last().map(|m| m.content.len()).unwrap_or(0);
        Ok(format!("received {last} characters"))
    }
}

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let config: ProviderConfig = toml::from_str(
        r#"
        endpoint = "https://llm.example.org/v1/chat/completions"
        model_id = "echo-1"
        max_output_tokens = 256
        credential_env_var = "ECHO_API_KEY"
        "#,
    )?;
    let dir = std::env::temp_dir().join(format!("ontogen-record-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("session.jsonl");

    let mut live = Session::live(Arc::new(Echo), &config, Some(path.clone()))?;
    let first = live.send("List the main water bodies.")?;
    let second = live.send("Now group them by salinity.")?;

    let mut replay = Session::replay_file(&path)?;
    assert_eq!(replay.send("List the main water bodies.")?, first);
    assert_eq!(replay.send("Now group them by salinity.")?, second);
    let diverged = Session::replay_file(&path)?.send("Something else").is_err();
    std::fs::remove_dir_all(&dir)?;
    Ok(format!(
        "{first}\n{second}\nreplay of a different prompt rejected: {diverged}\n"
    ))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
