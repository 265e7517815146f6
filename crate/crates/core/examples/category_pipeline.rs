//! Split the keywords into categories, run one pipeline per category in
//! parallel and merge the results.

use std::path::Path;

use ontogen::pipeline::{categorize, generate_by_category, RunConfig, Runtime};

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/categories");
    let mut config = RunConfig::load(&fixture.join("run.toml"))?;
    let out = std::env::temp_dir().join(format!("ontogen-categories-{}", std::process::id()));
    config.output_dir = out.clone();
    let runtime = Runtime::default();
    let plan = categorize(&config, &runtime)?;
    let summary = generate_by_category(&config, &plan, 2, None, &runtime)?;
    let text = summary.to_text();
    std::fs::remove_dir_all(&out)?;
    Ok(text)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
