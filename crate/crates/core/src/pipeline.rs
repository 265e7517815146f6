//! End-to-end runs: configuration, the generation stages, verification,
//! per-category runs and their merge, and transcript checking.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuse::{merge, FuseError, MergePolicy};
use crate::gateway::{
    read_transcript, ChatTransport, GatewayError, HttpTransport, ProviderConfig, Role, Session,
};
use crate::metrics::{compute_metrics, gap_report, hierarchy_depth, GapReport};
use crate::model::{OntologyGraph, OntologyMetrics};
use crate::prompt::{
    parse_competency_questions, parse_conceptual_model, parse_extraction_response, plan_categories,
    DomainProfile, PendingFragment, PipelineState, PlanError, ProfileError, PromptError, StageId,
    TemplateSet,
};
use crate::turtle::serialize;
use crate::verify::{
    correction_loop, CorrectionConfig, PitfallConfig, RoundLog, RoundOutcome, VerificationReport,
};

pub const GENERATION_SESSION: &str = "session_p01-p16.jsonl";
pub const CORRECTION_SESSION: &str = "session_p17-p19.jsonl";
pub const CATEGORIZE_SESSION: &str = "session_categorize.jsonl";
pub const PARTIAL_RUN_MARKER: &str = "PARTIAL_RUN";
pub const FINAL_ONTOLOGY: &str = "ontology.final.ttl";
pub const MERGED_ONTOLOGY: &str = "ontology.merged.ttl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    LiveRecord,
    Replay,
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::LiveRecord => "live-record",
            RunMode::Replay => "replay",
        })
    }
}

fn default_rounds() -> u32 {
    3
}

fn default_duplicate_threshold() -> f64 {
    0.9
}

fn default_align_threshold() -> f64 {
    crate::align::DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub profile_path: PathBuf,
    pub provider: ProviderConfig,
    pub mode: RunMode,
    pub transcript_dir: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_rounds")]
    pub correction_max_rounds: u32,
    #[serde(default = "default_duplicate_threshold")]
    pub duplicate_threshold: f64,
    #[serde(default = "default_align_threshold")]
    pub align_threshold: f64,
    #[serde(default)]
    pub merge: MergePolicy,
    /// Directory overriding some or all bundled templates.
    #[serde(default)]
    pub template_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("category plan does not match the profile: {0}")]
    PlanMismatch(String),
    #[error(transparent)]
    Fuse(#[from] FuseError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RunConfig {
    /// Read a TOML config. Relative paths are taken relative to the config
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| RunError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut config.profile_path);
        resolve(&mut config.transcript_dir);
        resolve(&mut config.output_dir);
        if let Some(dir) = config.template_dir.as_mut() {
            resolve(dir);
        }
        config.validate().map_err(|message| RunError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.correction_max_rounds == 0 {
            return Err("correction_max_rounds must be positive".into());
        }
        for (name, t) in [
            ("duplicate_threshold", self.duplicate_threshold),
            ("align_threshold", self.align_threshold),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(format!("{name} must lie in (0, 1]"));
            }
        }
        self.provider.validate().map_err(|e| e.to_string())
    }

    pub fn templates(&self) -> Result<TemplateSet, RunError> {
        Ok(match &self.template_dir {
            Some(dir) => TemplateSet::from_dir(dir)?,
            None => TemplateSet::bundled(),
        })
    }

    fn correction_config(&self) -> CorrectionConfig {
        CorrectionConfig {
            max_rounds: self.correction_max_rounds,
            pitfalls: PitfallConfig {
                duplicate_threshold: self.duplicate_threshold,
            },
        }
    }

    /// Copy with transcripts and outputs moved into per-category
    /// subdirectories.
    pub fn for_category(&self, slug: &str) -> RunConfig {
        RunConfig {
            transcript_dir: self.transcript_dir.join(slug),
            output_dir: self.output_dir.join("categories").join(slug),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Completed,
    /// The reply should have been Turtle but failed to parse or merge; it
    /// was handed to the correction loop.
    Deferred(String),
    /// Not part of this run (no reuse examples).
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub stages: Vec<(StageId, StageStatus)>,
    pub metrics: OntologyMetrics,
    pub hierarchy_depth: Option<usize>,
    pub gaps: GapReport,
    pub report: VerificationReport,
    pub rounds: Vec<RoundLog>,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (stage, status) in &self.stages {
            let status = match status {
                StageStatus::Completed => "completed".to_string(),
                StageStatus::Deferred(why) => {
                    format!(
                        "deferred to correction ({})",
                        why.lines().next().unwrap_or_default()
                    )
                }
                StageStatus::Skipped => "skipped".to_string(),
            };
            out.push_str(&format!("{} {}: {status}\n", stage.code(), stage.name()));
        }
        for r in &self.rounds {
            out.push_str(&format!("{}\n", round_line(r)));
        }
        out.push_str(&format!(
            "verification: {}\n",
            if self.report.clean {
                "clean".to_string()
            } else {
                format!("{} finding(s)", self.report.findings.len())
            }
        ));
        out.push_str(&self.metrics.to_report());
        out
    }
}

fn round_line(r: &RoundLog) -> String {
    let outcome = match &r.outcome {
        RoundOutcome::Accepted => "accepted".to_string(),
        RoundOutcome::Rejected { reason } => format!("rejected: {reason}"),
    };
    let retry = match &r.retried_after {
        Some(reason) => format!(" (first attempt rejected: {reason})"),
        None => String::new(),
    };
    format!(
        "{} round {}: {} prompt(s), findings {} -> {}, {outcome}{retry}",
        r.kind.stage().code(),
        r.round,
        r.prompts,
        r.findings_before,
        r.findings_after
    )
}

/// How model calls are made in live-record mode.
#[derive(Clone, Default)]
pub struct Runtime {
    /// Used instead of the HTTP transport when set.
    pub transport: Option<Arc<dyn ChatTransport>>,
}

impl Runtime {
    fn transport(&self, config: &RunConfig) -> Result<Arc<dyn ChatTransport>, GatewayError> {
        match &self.transport {
            Some(t) => Ok(t.clone()),
            None => Ok(Arc::new(HttpTransport::new(&config.provider)?)),
        }
    }

    /// Session named `file` under the config's transcript directory.
    /// Replay sessions for corrections or categorization may be absent; a
    /// missing file then means an empty transcript.
    fn session(
        &self,
        config: &RunConfig,
        file: &str,
        optional: bool,
    ) -> Result<Session, GatewayError> {
        let path = config.transcript_dir.join(file);
        match config.mode {
            RunMode::Replay => {
                if optional && !path.exists() {
                    Ok(Session::replay(Vec::new()))
                } else {
                    Session::replay_file(&path)
                }
            }
            RunMode::LiveRecord => {
                let transport = self.transport(config)?;
                std::fs::create_dir_all(&config.transcript_dir).map_err(|source| {
                    crate::gateway::TranscriptError::Io {
                        path: config.transcript_dir.clone(),
                        source,
                    }
                })?;
                Session::live(transport, &config.provider, Some(path))
            }
        }
    }
}

/// Run all stages for the profile named in `config`.
pub fn generate(config: &RunConfig, runtime: &Runtime) -> Result<RunSummary, RunError> {
    let profile = DomainProfile::load(&config.profile_path)?;
    generate_for_profile(config, &profile, runtime)
}

struct RunDir<'a> {
    config: &'a RunConfig,
}

impl RunDir<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(io_err(&path))
    }

    /// Copy the session files into the run directory, so it can be replayed
    /// on its own.
    fn copy_transcripts(&self) -> Result<(), RunError> {
        let target = self.path("transcripts");
        std::fs::create_dir_all(&target).map_err(io_err(&target))?;
        for name in [GENERATION_SESSION, CORRECTION_SESSION] {
            let source = self.config.transcript_dir.join(name);
            if source.is_file() {
                let dest = target.join(name);
                std::fs::copy(&source, &dest).map_err(io_err(&dest))?;
            }
        }
        Ok(())
    }

    fn fail(&self, stage: &str, message: String) -> RunError {
        let marker = format!("failed_stage: {stage}\nerror: {message}\n");
        if let Err(e) = self.write(PARTIAL_RUN_MARKER, &marker) {
            tracing::error!("cannot write partial-run marker: {e}");
        }
        let _ = self.copy_transcripts();
        RunError::Stage {
            stage: stage.to_string(),
            message,
        }
    }
}

/// Run all stages for an already loaded profile.
pub fn generate_for_profile(
    config: &RunConfig,
    profile: &DomainProfile,
    runtime: &Runtime,
) -> Result<RunSummary, RunError> {
    profile.validate()?;
    let templates = config.templates()?;
    if config.mode == RunMode::LiveRecord {
        // Surface a missing credential before any stage runs.
        runtime.transport(config)?;
    }
    let dir = RunDir { config };
    std::fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    for stale in [PARTIAL_RUN_MARKER, FINAL_ONTOLOGY] {
        let _ = std::fs::remove_file(dir.path(stale));
    }
    dir.write(
        "profile.snapshot",
        &toml::to_string(profile).expect("profiles serialize"),
    )?;
    dir.write(
        "config.snapshot",
        &toml::to_string(config).expect("configs serialize"),
    )?;

    let first = StageId::Requirements;
    let mut session = runtime
        .session(config, GENERATION_SESSION, false)
        .map_err(|e| dir.fail(&first.to_string(), e.to_string()))?;
    let mut state = PipelineState::new(profile.clone());
    let mut stages = Vec::new();
    for &stage in StageId::generation_stages() {
        if !profile.stage_applies(stage) {
            stages.push((stage, StageStatus::Skipped));
            continue;
        }
        let status = run_stage(&mut state, &mut session, &templates, stage)
            .map_err(|e| dir.fail(&stage.to_string(), e))?;
        tracing::info!(stage = %stage, "stage finished");
        stages.push((stage, status));
    }

    let mut corrections = runtime
        .session(config, CORRECTION_SESSION, true)
        .map_err(|e| dir.fail("verification", e.to_string()))?;
    let outcome = correction_loop(
        state,
        &mut corrections,
        &templates,
        &config.correction_config(),
    )
    .map_err(|e| dir.fail("verification", e.to_string()))?;

    let graph = &outcome.state.working_graph;
    let metrics = compute_metrics(graph);
    let depth = hierarchy_depth(graph).ok();
    let gaps = gap_report(&metrics, &profile.target_metrics);
    dir.write(FINAL_ONTOLOGY, &serialize(graph))?;
    let mut metrics_text = metrics.to_report();
    metrics_text.push_str(&match depth {
        Some(d) => format!("hierarchy_depth: {d}\n"),
        None => "hierarchy_depth: cyclic\n".to_string(),
    });
    dir.write("metrics.txt", &metrics_text)?;
    dir.write("gaps.txt", &gaps.to_report())?;
    let mut verification = outcome.report.to_report();
    for r in &outcome.rounds {
        verification.push_str(&format!("# {}\n", round_line(r)));
    }
    for kind in &outcome.exhausted {
        verification.push_str(&format!(
            "# {kind} findings remain after the last allowed round\n"
        ));
    }
    dir.write("verification.txt", &verification)?;
    dir.copy_transcripts()?;

    Ok(RunSummary {
        output_dir: config.output_dir.clone(),
        stages,
        metrics,
        hierarchy_depth: depth,
        gaps,
        report: outcome.report,
        rounds: outcome.rounds,
    })
}

/// Render, send and absorb one generation stage. Errors are returned as
/// text for the partial-run marker.
fn run_stage(
    state: &mut PipelineState,
    session: &mut Session,
    templates: &TemplateSet,
    stage: StageId,
) -> Result<StageStatus, String> {
    let prompt = templates
        .render(stage, state, None)
        .map_err(|e| e.to_string())?;
    let reply = session.send(&prompt).map_err(|e| e.to_string())?;
    state.complete(stage).map_err(|e| e.to_string())?;
    match stage {
        StageId::CompetencyQuestions => {
            state.competency_questions = parse_competency_questions(&reply);
            if state.competency_questions.is_empty() {
                tracing::warn!("no competency questions found in the reply");
            }
        }
        StageId::Extraction => {
            let parsed = parse_extraction_response(&reply);
            let known = state.competency_questions.len();
            let (valid, stray): (Vec<_>, Vec<_>) = parsed
                .records
                .iter()
                .cloned()
                .partition(|r| r.cq_index <= known);
            if parsed.skipped > 0 || !stray.is_empty() {
                tracing::warn!(
                    skipped = parsed.skipped,
                    unknown_questions = stray.len(),
                    ratio = parsed.success_ratio(),
                    "some extraction blocks were not usable"
                );
            }
            state.extracted = valid;
        }
        StageId::ConceptualModel => {
            state.conceptual_triples = parse_conceptual_model(&reply);
        }
        s if s.yields_turtle() => {
            if let Err(err) = state.aggregate_in_place(&reply) {
                let message = err.to_string();
                tracing::warn!(stage = %stage, error = %message, "reply deferred to syntax correction");
                state.pending_fragments.push(PendingFragment {
                    stage,
                    text: reply,
                    error: message.clone(),
                });
                return Ok(StageStatus::Deferred(message));
            }
        }
        _ => {}
    }
    Ok(StageStatus::Completed)
}

/// Directory-safe name for a category.
pub fn slugify(name: &str) -> String {
    let mut slug = String::new();
    for c in name.trim().chars() {
        if c.is_alphanumeric() {
            slug.extend(c.to_lowercase());
        } else if !slug.ends_with('-') {
            slug.push('-');
        }
    }
    let slug = slug.trim_matches('-').to_string();
    if slug.is_empty() {
        "category".to_string()
    } else {
        slug
    }
}

/// Distinct slugs for the plan's categories, in plan order.
pub fn category_slugs(plan: &IndexMap<String, Vec<String>>) -> Vec<String> {
    let mut seen = HashSet::new();
    plan.keys()
        .map(|name| {
            let base = slugify(name);
            let mut slug = base.clone();
            let mut n = 2;
            while !seen.insert(slug.clone()) {
                slug = format!("{base}-{n}");
                n += 1;
            }
            slug
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CategoryRun {
    pub category_name: String,
    pub keywords: Vec<String>,
    pub result_graph_path: PathBuf,
    pub metrics: OntologyMetrics,
}

#[derive(Debug, Clone, Serialize)]
pub struct CategorySummary {
    pub runs: Vec<CategoryRun>,
    /// Categories whose run failed, with the reason.
    pub failures: Vec<(String, String)>,
    pub warnings: Vec<String>,
    pub merged_path: PathBuf,
    pub merged_metrics: OntologyMetrics,
}

impl CategorySummary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for run in &self.runs {
            out.push_str(&format!(
                "{}: {} keyword(s), {} classes, {} axioms\n",
                run.category_name,
                run.keywords.len(),
                run.metrics.class_count,
                run.metrics.axiom_count
            ));
        }
        for (name, why) in &self.failures {
            out.push_str(&format!("{name}: FAILED ({why})\n"));
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out.push_str("merged:\n");
        out.push_str(&self.merged_metrics.to_report());
        out
    }
}

/// Ask the model to group the profile's keywords into categories.
pub fn categorize(
    config: &RunConfig,
    runtime: &Runtime,
) -> Result<IndexMap<String, Vec<String>>, RunError> {
    let profile = DomainProfile::load(&config.profile_path)?;
    let templates = config.templates()?;
    let prompt = templates.render_categorize(&profile)?;
    let mut session = runtime.session(config, CATEGORIZE_SESSION, false)?;
    let reply = session.send(&prompt)?;
    let plan = plan_categories(&profile.keywords, &reply)?;
    std::fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    let path = config.output_dir.join("plan.txt");
    std::fs::write(&path, crate::prompt::format_plan(&plan)).map_err(io_err(&path))?;
    Ok(plan)
}

/// Read a plan file written by [`categorize`] and check it against the
/// profile's keywords.
pub fn load_plan(
    path: &Path,
    profile: &DomainProfile,
) -> Result<IndexMap<String, Vec<String>>, RunError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(plan_categories(&profile.keywords, &text)?)
}

/// One independent run per category, at most `jobs` at a time, then a merge
/// of the successful results in plan order. `only` restricts the run to one
/// category.
pub fn generate_by_category(
    config: &RunConfig,
    plan: &IndexMap<String, Vec<String>>,
    jobs: usize,
    only: Option<&str>,
    runtime: &Runtime,
) -> Result<CategorySummary, RunError> {
    let profile = DomainProfile::load(&config.profile_path)?;
    let known: HashSet<String> = profile
        .keywords
        .iter()
        .map(|k| k.trim().to_lowercase())
        .collect();
    for (name, kws) in plan {
        if kws.is_empty() {
            return Err(PlanError::EmptyCategory(name.clone()).into());
        }
        if let Some(k) = kws
            .iter()
            .find(|k| !known.contains(&k.trim().to_lowercase()))
        {
            return Err(RunError::PlanMismatch(format!(
                "`{k}` in category `{name}` is not a profile keyword"
            )));
        }
    }
    if let Some(name) = only {
        if !plan.contains_key(name) {
            return Err(RunError::PlanMismatch(format!(
                "no category named `{name}`"
            )));
        }
    }
    let slugs = category_slugs(plan);
    let work: VecDeque<usize> = (0..plan.len())
        .filter(|&i| only.is_none_or(|name| plan.get_index(i).unwrap().0 == name))
        .collect();
    let queue = Mutex::new(work);
    let results: Mutex<Vec<Option<Result<RunSummary, String>>>> =
        Mutex::new(vec![None; plan.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1) {
            scope.spawn(|| loop {
                let Some(i) = queue.lock().unwrap().pop_front() else {
                    break;
                };
                let (name, kws) = plan.get_index(i).unwrap();
                let sub = config.for_category(&slugs[i]);
                tracing::info!(category = %name, "category run started");
                let result = generate_for_profile(&sub, &profile.for_keywords(kws), runtime)
                    .map_err(|e| e.to_string());
                results.lock().unwrap()[i] = Some(result);
            });
        }
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut graphs = Vec::new();
    for (i, result) in results.into_inner().unwrap().into_iter().enumerate() {
        let Some(result) = result else { continue };
        let (name, kws) = plan.get_index(i).unwrap();
        match result.and_then(|summary| {
            let path = summary.output_dir.join(FINAL_ONTOLOGY);
            let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
            let graph = crate::turtle::parse_turtle(&text).map_err(|e| e.to_string())?;
            Ok((summary, path, graph))
        }) {
            Ok((summary, path, graph)) => {
                runs.push(CategoryRun {
                    category_name: name.clone(),
                    keywords: kws.clone(),
                    result_graph_path: path,
                    metrics: summary.metrics,
                });
                graphs.push(graph);
            }
            Err(why) => failures.push((name.clone(), why)),
        }
    }
    let mut warnings: Vec<String> = failures
        .iter()
        .map(|(name, why)| format!("category `{name}` failed and is left out of the merge: {why}"))
        .collect();
    let merged = match graphs.split_first() {
        Some((foundation, additions)) => merge(foundation, additions, &config.merge)?,
        None => {
            warnings.push("no category run succeeded; the merged ontology is empty".into());
            OntologyGraph::new()
        }
    };
    std::fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    let merged_path = config.output_dir.join(MERGED_ONTOLOGY);
    std::fs::write(&merged_path, serialize(&merged)).map_err(io_err(&merged_path))?;
    let summary = CategorySummary {
        runs,
        failures,
        warnings,
        merged_path,
        merged_metrics: compute_metrics(&merged),
    };
    let report = config.output_dir.join("categories.txt");
    std::fs::write(&report, summary.to_text()).map_err(io_err(&report))?;
    Ok(summary)
}

/// Check a generation transcript against the prompts the templates produce
/// for `profile`, without running anything. Returns the problems found.
pub fn check_generation_transcript(
    path: &Path,
    profile: &DomainProfile,
    templates: &TemplateSet,
) -> Vec<String> {
    let records = match read_transcript(path) {
        Ok(r) => r,
        Err(e) => return vec![e.to_string()],
    };
    let users: Vec<&str> = records
        .iter()
        .filter(|r| r.role == Role::User)
        .map(|r| r.content.as_str())
        .collect();
    let mut problems = Vec::new();
    let mut state = PipelineState::new(profile.clone());
    let mut turn = 0;
    for &stage in StageId::generation_stages() {
        if !profile.stage_applies(stage) {
            continue;
        }
        let expected = match templates.render(stage, &state, None) {
            Ok(text) => text,
            Err(e) => {
                problems.push(format!("{stage}: cannot render: {e}"));
                break;
            }
        };
        match users.get(turn) {
            None => {
                problems.push(format!("{stage}: missing from the transcript"));
                break;
            }
            Some(actual) if *actual != expected => {
                problems.push(format!(
                    "{stage}: recorded prompt differs from the rendered template"
                ));
            }
            Some(_) => {}
        }
        turn += 1;
        state.stage = Some(stage);
    }
    if users.len() > turn && problems.is_empty() {
        problems.push(format!("{} unexpected extra prompt(s)", users.len() - turn));
    }
    problems
}

/// Check that every prompt in a correction transcript comes from one of the
/// correction templates.
pub fn check_correction_transcript(path: &Path, templates: &TemplateSet) -> Vec<String> {
    let records = match read_transcript(path) {
        Ok(r) => r,
        Err(e) => return vec![e.to_string()],
    };
    let prefixes: Vec<&str> = [
        StageId::FixSyntax,
        StageId::FixInconsistency,
        StageId::FixPitfall,
    ]
    .into_iter()
    .map(|s| templates.fixed_prefix(s))
    .collect();
    records
        .iter()
        .filter(|r| r.role == Role::User)
        .filter(|r| !prefixes.iter().any(|p| r.content.starts_with(p)))
        .map(|r| format!("turn {}: not a correction prompt", r.index))
        .collect()
}

/// Validate the transcripts of a run configuration (and of each category
/// when a plan is given).
pub fn replay_check(
    config: &RunConfig,
    plan: Option<&IndexMap<String, Vec<String>>>,
) -> Result<Vec<String>, RunError> {
    let profile = DomainProfile::load(&config.profile_path)?;
    let templates = config.templates()?;
    let mut problems = Vec::new();
    let mut check_dir = |dir: &Path, profile: &DomainProfile, label: &str| {
        let generation = dir.join(GENERATION_SESSION);
        for p in check_generation_transcript(&generation, profile, &templates) {
            problems.push(format!("{label}{}: {p}", GENERATION_SESSION));
        }
        let correction = dir.join(CORRECTION_SESSION);
        if correction.exists() {
            for p in check_correction_transcript(&correction, &templates) {
                problems.push(format!("{label}{}: {p}", CORRECTION_SESSION));
            }
        }
    };
    match plan {
        None => check_dir(&config.transcript_dir, &profile, ""),
        Some(plan) => {
            for ((name, kws), slug) in plan.iter().zip(category_slugs(plan)) {
                check_dir(
                    &config.transcript_dir.join(&slug),
                    &profile.for_keywords(kws),
                    &format!("[{name}] "),
                );
            }
        }
    }
    Ok(problems)
}
