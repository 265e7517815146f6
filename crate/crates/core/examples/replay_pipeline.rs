//! Run the whole generation pipeline from a recorded transcript.

use std::path::Path;

use ontogen::pipeline::{generate, RunConfig, Runtime};

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/e2e");
    let mut config = RunConfig::load(&fixture.join("run.toml"))?;
    let out = std::env::temp_dir().join(format!("ontogen-replay-{}", std::process::id()));
    config.output_dir = out.clone();
    let summary = generate(&config, &Runtime::default())?;
    let text = summary.to_text();
    std::fs::remove_dir_all(&out)?;
    Ok(text)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
