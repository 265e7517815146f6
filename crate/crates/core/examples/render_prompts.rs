//! Render the prompt of every generation stage for a domain profile.

use std::path::Path;

use ontogen::prompt::{DomainProfile, PipelineState, StageId, TemplateSet};

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/e2e/profile.toml");
    let profile = DomainProfile::load(&path)?;
    let templates = TemplateSet::bundled();
    let mut state = PipelineState::new(profile);
    let mut out = String::new();
    for &stage in StageId::generation_stages() {
        if !state.profile.stage_applies(stage) {
            continue;
        }
        let text = templates.render(stage, &state, None)?;
        out.push_str(&format!(
            "==== {stage} ({} chars)\n{}\n",
            text.len(),
            text.lines().next().unwrap_or("")
        ));
        state.complete(stage)?;
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
