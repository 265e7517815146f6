use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use ontogen::align::{align_with_scope, EntityScope, DEFAULT_THRESHOLD};
use ontogen::fuse::{merge, AnnotationPrecedence, MergePolicy};
use ontogen::metrics::{compute_metrics, gap_report};
use ontogen::pipeline::{self, RunConfig, RunMode, Runtime};
use ontogen::prompt::DomainProfile;
use ontogen::verify::{verify_graph, PitfallConfig};
use ontogen::{parse_turtle, serialize, OntologyGraph};

#[derive(Parser)]
#[command(
    name = "ontogen",
    version,
    about = "Generate, verify, merge and align OWL ontologies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the generation stages and the correction loop.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<RunMode>,
        /// Category plan; runs one pipeline per category and merges them.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Only run this category of the plan.
        #[arg(long, requires = "plan")]
        category: Option<String>,
    },
    /// Ask the model to group the profile keywords into categories.
    Categorize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<RunMode>,
    },
    /// Merge addition ontologies into a foundation ontology.
    Merge {
        foundation: PathBuf,
        #[arg(required = true)]
        additions: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "foundation-wins")]
        precedence: Precedence,
        #[arg(long)]
        dedup_properties: bool,
        #[arg(long, default_value_t = 0.9)]
        duplicate_threshold: f64,
    },
    /// Print the metric vector of an ontology.
    Metrics {
        file: PathBuf,
        /// Also print the gaps against this profile's target metrics.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Report consistency problems and pitfalls; exits 1 unless clean.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        duplicate_threshold: f64,
    },
    /// Lexically align a generated ontology against a gold ontology.
    Align {
        generated: PathBuf,
        gold: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        classes_only: bool,
    },
    /// Check recorded transcripts against the templates without running.
    ReplayCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Precedence {
    FoundationWins,
    AdditionWins,
}

fn parse_mode(s: &str) -> Result<RunMode, String> {
    match s {
        "live-record" => Ok(RunMode::LiveRecord),
        "replay" => Ok(RunMode::Replay),
        other => Err(format!(
            "unknown mode `{other}` (expected live-record or replay)"
        )),
    }
}

type Failure = Box<dyn std::error::Error>;

fn read_graph(path: &Path) -> Result<OntologyGraph, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_turtle(&text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn load_config(path: &Path, mode: Option<RunMode>) -> Result<RunConfig, Failure> {
    let mut config = RunConfig::load(path)?;
    if let Some(mode) = mode {
        config.mode = mode;
    }
    Ok(config)
}

/// Exit code 0 means success or clean, 1 means findings.
fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Generate {
            config,
            mode,
            plan,
            jobs,
            category,
        } => {
            let config = load_config(&config, mode)?;
            let runtime = Runtime::default();
            match plan {
                None => {
                    let summary = pipeline::generate(&config, &runtime)?;
                    print!("{}", summary.to_text());
                    Ok(u8::from(!summary.report.clean))
                }
                Some(plan_path) => {
                    let profile = DomainProfile::load(&config.profile_path)?;
                    let plan = pipeline::load_plan(&plan_path, &profile)?;
                    let summary = pipeline::generate_by_category(
                        &config,
                        &plan,
                        jobs,
                        category.as_deref(),
                        &runtime,
                    )?;
                    print!("{}", summary.to_text());
                    Ok(u8::from(!summary.failures.is_empty()))
                }
            }
        }
        Command::Categorize { config, mode } => {
            let config = load_config(&config, mode)?;
            let plan = pipeline::categorize(&config, &Runtime::default())?;
            print!("{}", ontogen::prompt::format_plan(&plan));
            Ok(0)
        }
        Command::Merge {
            foundation,
            additions,
            output,
            precedence,
            dedup_properties,
            duplicate_threshold,
        } => {
            let foundation = read_graph(&foundation)?;
            let additions = additions
                .iter()
                .map(|p| read_graph(p))
                .collect::<Result<Vec<_>, _>>()?;
            let policy = MergePolicy {
                annotation_precedence: match precedence {
                    Precedence::FoundationWins => AnnotationPrecedence::FoundationWins,
                    Precedence::AdditionWins => AnnotationPrecedence::AdditionWins,
                },
                dedup_properties,
                duplicate_threshold,
            };
            let merged = merge(&foundation, &additions, &policy)?;
            std::fs::write(&output, serialize(&merged))
                .map_err(|e| format!("{}: {e}", output.display()))?;
            Ok(0)
        }
        Command::Metrics { file, profile } => {
            let metrics = compute_metrics(&read_graph(&file)?);
            print!("{}", metrics.to_report());
            if let Some(profile) = profile {
                let profile = DomainProfile::load(&profile)?;
                print!(
                    "{}",
                    gap_report(&metrics, &profile.target_metrics).to_report()
                );
            }
            Ok(0)
        }
        Command::Verify {
            file,
            duplicate_threshold,
        } => {
            let text =
                std::fs::read_to_string(&file).map_err(|e| format!("{}: {e}", file.display()))?;
            match parse_turtle(&text) {
                Ok(graph) => {
                    let report = verify_graph(
                        &graph,
                        &PitfallConfig {
                            duplicate_threshold,
                        },
                    );
                    print!("{}", report.to_report());
                    Ok(u8::from(!report.clean))
                }
                Err(issue) => {
                    println!("SYNTAX SYNTAX_ERROR {issue}");
                    Ok(1)
                }
            }
        }
        Command::Align {
            generated,
            gold,
            threshold,
            classes_only,
        } => {
            if !(threshold > 0.0 && threshold <= 1.0) {
                return Err(format!("threshold {threshold} is outside (0, 1]").into());
            }
            let scope = if classes_only {
                EntityScope::ClassesOnly
            } else {
                EntityScope::ClassesAndProperties
            };
            let result = align_with_scope(
                &read_graph(&generated)?,
                &read_graph(&gold)?,
                threshold,
                scope,
            );
            print!("{}", result.to_report());
            Ok(0)
        }
        Command::ReplayCheck { config, plan } => {
            let config = RunConfig::load(&config)?;
            let plan = match plan {
                Some(path) => {
                    let profile = DomainProfile::load(&config.profile_path)?;
                    Some(pipeline::load_plan(&path, &profile)?)
                }
                None => None,
            };
            let problems = pipeline::replay_check(&config, plan.as_ref())?;
            if problems.is_empty() {
                println!("ok");
            }
            for p in &problems {
                println!("{p}");
            }
            Ok(u8::from(!problems.is_empty()))
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
