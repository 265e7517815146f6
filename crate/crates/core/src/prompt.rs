//! Stage templates, domain profiles, pipeline state, and the parsers that
//! turn model replies into structured artifacts.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use indexmap::IndexMap;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, OntologyGraph, OntologyMetrics, PrefixMap};
use crate::turtle::{parse_turtle_with, ParseOptions, SyntaxIssue};
use crate::verify::FindingKind;

/// The nineteen pipeline stages, numbered as prompts P1 to P19.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageId {
    Requirements = 1,
    Reuse,
    CompetencyQuestions,
    Extraction,
    ConceptualModel,
    ImplementTurtle,
    EnrichInverse,
    EnrichReflexive,
    EnrichSymmetric,
    EnrichFunctional,
    EnrichTransitive,
    DataProperties,
    Individuals,
    Metadata,
    Comments,
    HierarchyRefinement,
    FixSyntax,
    FixInconsistency,
    FixPitfall,
}

impl StageId {
    pub const ALL: [StageId; 19] = [
        StageId::Requirements,
        StageId::Reuse,
        StageId::CompetencyQuestions,
        StageId::Extraction,
        StageId::ConceptualModel,
        StageId::ImplementTurtle,
        StageId::EnrichInverse,
        StageId::EnrichReflexive,
        StageId::EnrichSymmetric,
        StageId::EnrichFunctional,
        StageId::EnrichTransitive,
        StageId::DataProperties,
        StageId::Individuals,
        StageId::Metadata,
        StageId::Comments,
        StageId::HierarchyRefinement,
        StageId::FixSyntax,
        StageId::FixInconsistency,
        StageId::FixPitfall,
    ];

    /// The generation stages P1 to P16, in execution order.
    pub fn generation_stages() -> &'static [StageId] {
        &Self::ALL[..16]
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<StageId> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    /// Short code such as `P7`.
    pub fn code(self) -> String {
        format!("P{}", self.number())
    }

    pub fn name(self) -> &'static str {
        match self {
            StageId::Requirements => "requirements",
            StageId::Reuse => "reuse",
            StageId::CompetencyQuestions => "competency_questions",
            StageId::Extraction => "extraction",
            StageId::ConceptualModel => "conceptual_model",
            StageId::ImplementTurtle => "implement_turtle",
            StageId::EnrichInverse => "enrich_inverse",
            StageId::EnrichReflexive => "enrich_reflexive",
            StageId::EnrichSymmetric => "enrich_symmetric",
            StageId::EnrichFunctional => "enrich_functional",
            StageId::EnrichTransitive => "enrich_transitive",
            StageId::DataProperties => "data_properties",
            StageId::Individuals => "individuals",
            StageId::Metadata => "metadata",
            StageId::Comments => "comments",
            StageId::HierarchyRefinement => "hierarchy_refinement",
            StageId::FixSyntax => "fix_syntax",
            StageId::FixInconsistency => "fix_inconsistency",
            StageId::FixPitfall => "fix_pitfall",
        }
    }

    pub fn template_file(self) -> String {
        format!("p{:02}_{}.txt", self.number(), self.name())
    }

    pub fn is_correction(self) -> bool {
        self >= StageId::FixSyntax
    }

    /// Stages whose reply is Turtle to be folded into the working graph.
    pub fn yields_turtle(self) -> bool {
        (StageId::ImplementTurtle..=StageId::HierarchyRefinement).contains(&self)
    }
}

impl fmt::Display for StageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.code(), self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CqFewshot {
    pub question: String,
    pub entities: Vec<String>,
    pub properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseExample {
    pub resource_name: String,
    pub resource_description: String,
    /// Arrow notation: one name per line, prefixed by `->`, `-->`, ... to
    /// mark its depth below the previous level.
    pub hierarchy_text: String,
}

impl ReuseExample {
    /// Depth of every non-empty line, counted as the dashes of its arrow.
    pub fn arrow_depths(&self) -> Vec<usize> {
        self.hierarchy_text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                let dashes = l.chars().take_while(|&c| c == '-').count();
                if l[dashes..].starts_with('>') {
                    dashes
                } else {
                    0
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainProfile {
    pub persona: String,
    pub domain_name: String,
    pub domain_description: String,
    pub keywords: Vec<String>,
    #[serde(default)]
    pub target_metrics: OntologyMetrics,
    #[serde(default)]
    pub cq_fewshots: Vec<CqFewshot>,
    #[serde(default)]
    pub data_property_fewshots: Vec<String>,
    #[serde(default)]
    pub individual_fewshots: Vec<String>,
    #[serde(default)]
    pub reuse_examples: Vec<ReuseExample>,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid profile {path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("profile field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("keyword `{0}` appears more than once")]
    DuplicateKeyword(String),
    #[error("{kind} few-shot #{index} does not parse: {issue}")]
    FewshotSyntax {
        kind: &'static str,
        index: usize,
        issue: SyntaxIssue,
    },
    #[error("reuse example `{resource}` jumps more than one level at line {line}")]
    ArrowDepth { resource: String, line: usize },
}

/// Namespace assumed for the default prefix `:` in few-shot snippets that
/// do not declare it.
pub const FEWSHOT_NAMESPACE: &str = "http://example.org/ontology#";

impl DomainProfile {
    pub fn from_toml_str(text: &str, path: &Path) -> Result<Self, ProfileError> {
        let profile: DomainProfile = toml::from_str(text).map_err(|e| ProfileError::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProfileError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        for (name, value) in [
            ("persona", &self.persona),
            ("domain_name", &self.domain_name),
            ("domain_description", &self.domain_description),
        ] {
            if value.trim().is_empty() {
                return Err(ProfileError::EmptyField(name));
            }
        }
        if self.keywords.is_empty() {
            return Err(ProfileError::EmptyField("keywords"));
        }
        let mut seen = HashSet::new();
        for kw in &self.keywords {
            if kw.trim().is_empty() {
                return Err(ProfileError::EmptyField("keywords"));
            }
            if !seen.insert(kw.trim().to_lowercase()) {
                return Err(ProfileError::DuplicateKeyword(kw.clone()));
            }
        }
        if self.cq_fewshots.is_empty() {
            return Err(ProfileError::EmptyField("cq_fewshots"));
        }
        let mut inherited = PrefixMap::standard();
        let _ = inherited.bind("", FEWSHOT_NAMESPACE);
        for (kind, snippets) in [
            ("data_property", &self.data_property_fewshots),
            ("individual", &self.individual_fewshots),
        ] {
            if snippets.is_empty() {
                return Err(ProfileError::EmptyField(if kind == "data_property" {
                    "data_property_fewshots"
                } else {
                    "individual_fewshots"
                }));
            }
            for (index, snippet) in snippets.iter().enumerate() {
                let options = ParseOptions {
                    inherited_prefixes: Some(&inherited),
                    base: None,
                };
                parse_turtle_with(snippet, &options)
                    .map_err(|issue| ProfileError::FewshotSyntax { kind, index, issue })?;
            }
        }
        for example in &self.reuse_examples {
            let mut previous = 0;
            for (i, depth) in example.arrow_depths().into_iter().enumerate() {
                if depth > previous + 1 {
                    return Err(ProfileError::ArrowDepth {
                        resource: example.resource_name.clone(),
                        line: i + 1,
                    });
                }
                previous = depth;
            }
        }
        Ok(())
    }

    pub fn has_reuse_examples(&self) -> bool {
        !self.reuse_examples.is_empty()
    }

    /// Whether `stage` is part of a run for this profile. The reuse and
    /// hierarchy-refinement stages need at least one reuse example.
    pub fn stage_applies(&self, stage: StageId) -> bool {
        match stage {
            StageId::Reuse | StageId::HierarchyRefinement => self.has_reuse_examples(),
            _ => true,
        }
    }

    /// A copy restricted to `keywords`, as used for a per-category run.
    pub fn for_keywords(&self, keywords: &[String]) -> DomainProfile {
        DomainProfile {
            keywords: keywords.to_vec(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub cq_index: usize,
    pub entities: Vec<String>,
    pub properties: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptualTriple {
    pub subject: String,
    pub relation: String,
    pub object: String,
}

/// A reply that should have been Turtle but did not parse or merge; kept for
/// the syntax-correction rounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingFragment {
    pub stage: StageId,
    pub text: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct PipelineState {
    /// Last completed stage.
    pub stage: Option<StageId>,
    pub profile: DomainProfile,
    pub competency_questions: Vec<String>,
    pub extracted: Vec<ExtractionRecord>,
    pub conceptual_triples: Vec<ConceptualTriple>,
    pub working_graph: OntologyGraph,
    pub pending_fragments: Vec<PendingFragment>,
    pub correction_rounds_used: BTreeMap<FindingKind, u32>,
}

/// Error text and affected Turtle for the correction stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorContext {
    pub error_message: String,
    pub affected_fragment: String,
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("missing value for placeholder `{0}`")]
    MissingPlaceholder(String),
    #[error("stage {requested} cannot run after {}", .current.map_or("nothing".to_string(), |s| s.to_string()))]
    StageOrder {
        requested: StageId,
        current: Option<StageId>,
    },
    #[error("fragment does not parse: {0}")]
    Syntax(#[from] SyntaxIssue),
    #[error("prefix `{label}` is bound to <{existing}>, fragment rebinds it to <{requested}>")]
    PrefixConflict {
        label: String,
        existing: String,
        requested: String,
    },
    #[error("invalid fragment: {0}")]
    Model(ModelError),
    #[error("cannot read template {path}: {source}")]
    TemplateIo {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl From<ModelError> for PromptError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::PrefixConflict {
                label,
                existing,
                requested,
            } => PromptError::PrefixConflict {
                label,
                existing,
                requested,
            },
            other => PromptError::Model(other),
        }
    }
}

impl PipelineState {
    pub fn new(profile: DomainProfile) -> Self {
        PipelineState {
            stage: None,
            profile,
            competency_questions: Vec::new(),
            extracted: Vec::new(),
            conceptual_triples: Vec::new(),
            working_graph: OntologyGraph::new(),
            pending_fragments: Vec::new(),
            correction_rounds_used: BTreeMap::new(),
        }
    }

    /// Whether `stage` may run next. Generation stages run once each in
    /// ascending order; correction stages need the Turtle implementation.
    pub fn check_order(&self, stage: StageId) -> Result<(), PromptError> {
        let ok = if stage.is_correction() {
            self.stage.is_some_and(|s| s >= StageId::ImplementTurtle)
        } else {
            self.stage.is_none_or(|s| !s.is_correction() && s < stage)
        };
        if ok {
            Ok(())
        } else {
            Err(PromptError::StageOrder {
                requested: stage,
                current: self.stage,
            })
        }
    }

    /// Mark `stage` as completed.
    pub fn complete(&mut self, stage: StageId) -> Result<(), PromptError> {
        self.check_order(stage)?;
        self.stage = Some(stage);
        Ok(())
    }

    pub fn rounds_used(&self, kind: FindingKind) -> u32 {
        self.correction_rounds_used.get(&kind).copied().unwrap_or(0)
    }

    /// Fold a Turtle reply into the working graph in place.
    pub fn aggregate_in_place(&mut self, fragment_text: &str) -> Result<(), PromptError> {
        if self.stage.is_none_or(|s| s < StageId::ImplementTurtle) {
            return Err(PromptError::StageOrder {
                requested: StageId::ImplementTurtle,
                current: self.stage,
            });
        }
        let fragment = parse_fragment(&self.working_graph, fragment_text)?;
        self.working_graph.absorb(&fragment)?;
        Ok(())
    }
}

/// Parse a reply with the working graph's prefixes available, so replies
/// that omit prefix declarations still resolve.
pub fn parse_fragment(working: &OntologyGraph, text: &str) -> Result<OntologyGraph, PromptError> {
    let options = ParseOptions {
        inherited_prefixes: Some(working.prefixes()),
        base: None,
    };
    Ok(parse_turtle_with(text, &options)?)
}

/// Value-returning form of [`PipelineState::aggregate_in_place`].
pub fn aggregate_fragment(
    state: &PipelineState,
    fragment_text: &str,
) -> Result<PipelineState, PromptError> {
    let mut next = state.clone();
    next.aggregate_in_place(fragment_text)?;
    Ok(next)
}

// ---------------------------------------------------------------------------
// Templates and rendering
// ---------------------------------------------------------------------------

const BUNDLED: [(&str, &str); 20] = [
    (
        "p01_requirements.txt",
        include_str!("../templates/p01_requirements.txt"),
    ),
    ("p02_reuse.txt", include_str!("../templates/p02_reuse.txt")),
    (
        "p03_competency_questions.txt",
        include_str!("../templates/p03_competency_questions.txt"),
    ),
    (
        "p04_extraction.txt",
        include_str!("../templates/p04_extraction.txt"),
    ),
    (
        "p05_conceptual_model.txt",
        include_str!("../templates/p05_conceptual_model.txt"),
    ),
    (
        "p06_implement_turtle.txt",
        include_str!("../templates/p06_implement_turtle.txt"),
    ),
    (
        "p07_enrich_inverse.txt",
        include_str!("../templates/p07_enrich_inverse.txt"),
    ),
    (
        "p08_enrich_reflexive.txt",
        include_str!("../templates/p08_enrich_reflexive.txt"),
    ),
    (
        "p09_enrich_symmetric.txt",
        include_str!("../templates/p09_enrich_symmetric.txt"),
    ),
    (
        "p10_enrich_functional.txt",
        include_str!("../templates/p10_enrich_functional.txt"),
    ),
    (
        "p11_enrich_transitive.txt",
        include_str!("../templates/p11_enrich_transitive.txt"),
    ),
    (
        "p12_data_properties.txt",
        include_str!("../templates/p12_data_properties.txt"),
    ),
    (
        "p13_individuals.txt",
        include_str!("../templates/p13_individuals.txt"),
    ),
    (
        "p14_metadata.txt",
        include_str!("../templates/p14_metadata.txt"),
    ),
    (
        "p15_comments.txt",
        include_str!("../templates/p15_comments.txt"),
    ),
    (
        "p16_hierarchy_refinement.txt",
        include_str!("../templates/p16_hierarchy_refinement.txt"),
    ),
    (
        "p17_fix_syntax.txt",
        include_str!("../templates/p17_fix_syntax.txt"),
    ),
    (
        "p18_fix_inconsistency.txt",
        include_str!("../templates/p18_fix_inconsistency.txt"),
    ),
    (
        "p19_fix_pitfall.txt",
        include_str!("../templates/p19_fix_pitfall.txt"),
    ),
    (
        "categorize.txt",
        include_str!("../templates/categorize.txt"),
    ),
];

pub const CATEGORIZE_TEMPLATE: &str = "categorize.txt";

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}").unwrap());

/// The stage templates, keyed by file name.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: HashMap<String, String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::bundled()
    }
}

impl TemplateSet {
    pub fn bundled() -> Self {
        TemplateSet {
            templates: BUNDLED
                .iter()
                .map(|(name, text)| (name.to_string(), text.to_string()))
                .collect(),
        }
    }

    /// Templates from `dir`, falling back to the bundled copy for any file
    /// the directory does not provide.
    pub fn from_dir(dir: &Path) -> Result<Self, PromptError> {
        let mut set = Self::bundled();
        for (name, text) in set.templates.iter_mut() {
            let path = dir.join(name);
            if path.is_file() {
                *text = std::fs::read_to_string(&path)
                    .map_err(|source| PromptError::TemplateIo { path, source })?;
            }
        }
        Ok(set)
    }

    pub fn get(&self, file_name: &str) -> Option<&str> {
        self.templates.get(file_name).map(String::as_str)
    }

    pub fn stage(&self, stage: StageId) -> &str {
        self.get(&stage.template_file())
            .expect("every stage has a bundled template")
    }

    /// Render one stage for `state`. Correction stages need `extra`.
    pub fn render(
        &self,
        stage: StageId,
        state: &PipelineState,
        extra: Option<&ErrorContext>,
    ) -> Result<String, PromptError> {
        state.check_order(stage)?;
        let mut values = profile_values(&state.profile);
        if let Some(ctx) = extra {
            values.insert("error_message", ctx.error_message.clone());
            values.insert("affected_fragment", ctx.affected_fragment.clone());
        }
        fill(self.stage(stage), &values)
    }

    pub fn render_categorize(&self, profile: &DomainProfile) -> Result<String, PromptError> {
        fill(
            self.get(CATEGORIZE_TEMPLATE).unwrap_or_default(),
            &profile_values(profile),
        )
    }

    /// Text of a template before its first placeholder.
    pub fn fixed_prefix(&self, stage: StageId) -> &str {
        let text = self.stage(stage);
        match PLACEHOLDER.find(text) {
            Some(m) => &text[..m.start()],
            None => text,
        }
    }
}

/// Render with the bundled templates.
pub fn render(
    stage: StageId,
    state: &PipelineState,
    extra: Option<&ErrorContext>,
) -> Result<String, PromptError> {
    TemplateSet::bundled().render(stage, state, extra)
}

/// Substitute every `{{name}}` in one pass; inserted values are not
/// re-scanned.
pub fn fill(template: &str, values: &HashMap<&str, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() * 2);
    let mut last = 0;
    for caps in PLACEHOLDER.captures_iter(template) {
        let whole = caps.get(0).unwrap();
        let name = &caps[1];
        let value = values
            .get(name)
            .filter(|v| !v.trim().is_empty())
            .ok_or_else(|| PromptError::MissingPlaceholder(name.to_string()))?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

fn quoted_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|i| format!("\"{i}\"")).collect();
    format!("[{}]", quoted.join(", "))
}

/// The persona as one role-play statement: a description such as "an
/// aquatic ecologist" becomes "You are an aquatic ecologist.", while a text
/// that already addresses the model is kept as written.
pub fn persona_statement(persona: &str) -> String {
    let text = persona.trim();
    let addressed = text
        .get(..8)
        .is_some_and(|head| head.eq_ignore_ascii_case("you are "));
    let mut out = if addressed {
        text.to_string()
    } else {
        format!("You are {text}")
    };
    if !out.ends_with(['.', '!', '?']) {
        out.push('.');
    }
    out
}

fn profile_values(profile: &DomainProfile) -> HashMap<&'static str, String> {
    let mut values = HashMap::new();
    values.insert("persona", persona_statement(&profile.persona));
    values.insert("domain_name", profile.domain_name.trim().to_string());
    values.insert(
        "domain_description",
        profile.domain_description.trim().to_string(),
    );
    values.insert("keywords", profile.keywords.join(", "));
    values.insert("target_metrics", profile.target_metrics.to_prompt_text());
    let cq = profile
        .cq_fewshots
        .iter()
        .enumerate()
        .map(|(i, shot)| {
            format!(
                "\"cq{}\": \"{}\"\nEntity: {}\nProperty: {}",
                i + 1,
                shot.question,
                quoted_list(&shot.entities),
                quoted_list(&shot.properties)
            )
        })
        .collect::<Vec<_>>()
        .join("\n\n");
    values.insert("cq_fewshots", cq);
    let join_snippets = |snippets: &[String]| {
        snippets
            .iter()
            .map(|s| s.trim().to_string())
            .collect::<Vec<_>>()
            .join("\n\n")
    };
    values.insert(
        "data_property_fewshots",
        join_snippets(&profile.data_property_fewshots),
    );
    values.insert(
        "individual_fewshots",
        join_snippets(&profile.individual_fewshots),
    );
    let resources = profile
        .reuse_examples
        .iter()
        .map(|r| {
            format!(
                "{}: {}",
                r.resource_name.trim(),
                r.resource_description.trim()
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    values.insert("reuse_resources", resources);
    let hierarchies = profile
        .reuse_examples
        .iter()
        .map(|r| r.hierarchy_text.trim().to_string())
        .collect::<Vec<_>>()
        .join("\n\n");
    values.insert("reuse_examples", hierarchies);
    values
}

// ---------------------------------------------------------------------------
// Reply parsers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtractionParse {
    pub records: Vec<ExtractionRecord>,
    pub blocks_total: usize,
    pub skipped: usize,
}

impl ExtractionParse {
    /// Share of blocks that parsed; 1.0 when there were none.
    pub fn success_ratio(&self) -> f64 {
        if self.blocks_total == 0 {
            1.0
        } else {
            self.records.len() as f64 / self.blocks_total as f64
        }
    }
}

static CQ_HEADER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?i)^\W*cq\s*(\d+)\W*\s*:"#).unwrap());
static ENTITY_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\W*entit(?:y|ies)\W*:\s*\[(.*)\]\s*,?\s*$").unwrap());
static PROPERTY_LINE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^\W*propert(?:y|ies)\W*:\s*\[(.*)\]\s*,?\s*$").unwrap());

fn list_items(inner: &str) -> Vec<String> {
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .trim_matches(|c| c == '"' || c == '\'')
                .trim()
                .to_string()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

/// Parse `"cqK": ...` blocks followed by `Entity: [...]` and
/// `Property: [...]` lines. Blocks lacking either list are skipped.
pub fn parse_extraction_response(text: &str) -> ExtractionParse {
    let mut blocks: Vec<(usize, Vec<&str>)> = Vec::new();
    for line in text.lines() {
        if let Some(caps) = CQ_HEADER.captures(line) {
            let index = caps[1].parse().unwrap_or(0);
            blocks.push((index, Vec::new()));
        } else if let Some((_, body)) = blocks.last_mut() {
            body.push(line);
        }
    }
    let mut result = ExtractionParse {
        blocks_total: blocks.len(),
        ..Default::default()
    };
    for (cq_index, body) in blocks {
        let entities = body
            .iter()
            .find_map(|l| ENTITY_LINE.captures(l).map(|c| list_items(&c[1])));
        let properties = body
            .iter()
            .find_map(|l| PROPERTY_LINE.captures(l).map(|c| list_items(&c[1])));
        match (entities, properties) {
            (Some(entities), Some(properties)) if cq_index > 0 => {
                result.records.push(ExtractionRecord {
                    cq_index,
                    entities,
                    properties,
                })
            }
            _ => result.skipped += 1,
        }
    }
    result
}

static ARROW_TRIPLE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\s*(.+?)\s*--\s*(.+?)\s*-->\s*(.+?)\s*$").unwrap());

/// Every `Subject -- relation --> Object` line, in input order.
pub fn parse_conceptual_model(text: &str) -> Vec<ConceptualTriple> {
    text.lines()
        .filter_map(|line| ARROW_TRIPLE.captures(line))
        .map(|c| ConceptualTriple {
            subject: c[1].to_string(),
            relation: c[2].to_string(),
            object: c[3].to_string(),
        })
        .collect()
}

pub fn format_conceptual_model(triples: &[ConceptualTriple]) -> String {
    triples
        .iter()
        .map(|t| format!("{} -- {} --> {}\n", t.subject, t.relation, t.object))
        .collect()
}

static LIST_MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"(?i)^\s*(?:[-*•]+|\d+[.)]|"?cq\s*\d+"?\s*[:.)])?\s*"#).unwrap());

/// Questions from a numbered or bulleted list: one per line, ending in `?`.
pub fn parse_competency_questions(text: &str) -> Vec<String> {
    text.lines()
        .map(|line| {
            let stripped = LIST_MARKER.replace(line, "");
            stripped
                .trim()
                .trim_matches(|c| c == '*' || c == '"')
                .trim()
                .to_string()
        })
        .filter(|q| q.ends_with('?') && q.len() > 1)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("keywords not assigned to any category: {}", .0.join(", "))]
    UnassignedKeywords(Vec<String>),
    #[error("keywords not in the profile: {}", .0.join(", "))]
    UnknownKeywords(Vec<String>),
    #[error("category `{0}` has no keywords")]
    EmptyCategory(String),
}

/// Parse `Category: k1, k2, ...` lines into a plan, checking that the
/// categories cover exactly the given keywords (compared case-insensitively).
/// Keywords in the plan keep the spelling of `keywords`.
pub fn plan_categories(
    keywords: &[String],
    response: &str,
) -> Result<IndexMap<String, Vec<String>>, PlanError> {
    let canonical: HashMap<String, &String> = keywords
        .iter()
        .map(|k| (k.trim().to_lowercase(), k))
        .collect();
    let mut plan: IndexMap<String, Vec<String>> = IndexMap::new();
    let mut unknown = Vec::new();
    let mut assigned = HashSet::new();
    for line in response.lines() {
        if line.trim_start().starts_with("```") {
            continue;
        }
        let Some((name, items)) = line.split_once(':') else {
            continue;
        };
        let name = LIST_MARKER
            .replace(name, "")
            .trim()
            .trim_matches('*')
            .trim()
            .to_string();
        if name.is_empty() {
            continue;
        }
        let entry = plan.entry(name).or_default();
        for item in items.split(',') {
            let item = item.trim().trim_matches('*').trim();
            if item.is_empty() {
                continue;
            }
            let folded = item.to_lowercase();
            match canonical.get(&folded) {
                Some(original) => {
                    assigned.insert(folded);
                    if !entry.contains(original) {
                        entry.push((*original).clone());
                    }
                }
                None => unknown.push(item.to_string()),
            }
        }
    }
    if !unknown.is_empty() {
        return Err(PlanError::UnknownKeywords(unknown));
    }
    if let Some((name, _)) = plan.iter().find(|(_, kws)| kws.is_empty()) {
        return Err(PlanError::EmptyCategory(name.clone()));
    }
    let missing: Vec<String> = keywords
        .iter()
        .filter(|k| !assigned.contains(&k.trim().to_lowercase()))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(PlanError::UnassignedKeywords(missing));
    }
    Ok(plan)
}

/// Format a plan as `Category: k1, k2` lines, the form `plan_categories` reads.
pub fn format_plan(plan: &IndexMap<String, Vec<String>>) -> String {
    plan.iter()
        .map(|(name, kws)| format!("{name}: {}\n", kws.join(", ")))
        .collect()
}
