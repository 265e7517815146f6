//! Structural consistency checks, the pitfall scan, and the correction loop
//! that feeds findings back to the model.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{GatewayError, Session};
use crate::metrics::{
    compute_metrics, declared_classes, declared_properties, duplicate_property_candidates,
    individuals,
};
use crate::model::{OntologyGraph, Term};
use crate::prompt::{
    parse_fragment, ErrorContext, PendingFragment, PipelineState, PromptError, StageId, TemplateSet,
};
use crate::turtle::{fragment_graph, serialize};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FindingKind {
    Syntax,
    Inconsistency,
    Pitfall,
}

impl FindingKind {
    pub const ALL: [FindingKind; 3] = [
        FindingKind::Syntax,
        FindingKind::Inconsistency,
        FindingKind::Pitfall,
    ];

    /// The correction stage that addresses this kind.
    pub fn stage(self) -> StageId {
        match self {
            FindingKind::Syntax => StageId::FixSyntax,
            FindingKind::Inconsistency => StageId::FixInconsistency,
            FindingKind::Pitfall => StageId::FixPitfall,
        }
    }
}

impl fmt::Display for FindingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingKind::Syntax => "SYNTAX",
            FindingKind::Inconsistency => "INCONSISTENCY",
            FindingKind::Pitfall => "PITFALL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub code: String,
    pub message: String,
    pub affected: BTreeSet<String>,
}

impl Finding {
    fn new(
        kind: FindingKind,
        code: &str,
        message: String,
        affected: impl IntoIterator<Item = String>,
    ) -> Self {
        Finding {
            kind,
            code: code.to_string(),
            message,
            affected: affected.into_iter().collect(),
        }
    }

    fn sort_key(&self) -> (FindingKind, &str, Option<&String>, &str) {
        (self.kind, &self.code, self.affected.first(), &self.message)
    }
}

impl fmt::Display for Finding {
    /// `KIND CODE <iri> ... message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.code)?;
        for iri in &self.affected {
            write!(f, " <{iri}>")?;
        }
        write!(f, " {}", self.message)
    }
}

pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub findings: Vec<Finding>,
    pub clean: bool,
}

impl VerificationReport {
    pub fn new(mut findings: Vec<Finding>) -> Self {
        sort_findings(&mut findings);
        VerificationReport {
            clean: findings.is_empty(),
            findings,
        }
    }

    pub fn count(&self, kind: FindingKind) -> usize {
        self.findings.iter().filter(|f| f.kind == kind).count()
    }

    /// One finding per line; `clean` when there are none.
    pub fn to_report(&self) -> String {
        if self.clean {
            return "clean\n".to_string();
        }
        self.findings.iter().map(|f| format!("{f}\n")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PitfallConfig {
    /// Similarity at which two properties count as duplicates.
    pub duplicate_threshold: f64,
}

impl Default for PitfallConfig {
    fn default() -> Self {
        PitfallConfig {
            duplicate_threshold: 0.9,
        }
    }
}

/// Cap on the number of cycles enumerated for one graph.
pub const MAX_REPORTED_CYCLES: usize = 100;

fn subclass_edges(graph: &OntologyGraph) -> BTreeMap<String, BTreeSet<String>> {
    let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in graph.iter() {
        if t.predicate_iri() != vocab::RDFS_SUBCLASS_OF {
            continue;
        }
        if let (Some(sub), Some(sup)) = (t.subject.as_iri(), t.object.as_iri()) {
            edges
                .entry(sub.to_string())
                .or_default()
                .insert(sup.to_string());
        }
    }
    edges
}

/// Every elementary subclass cycle, each listed once starting from its
/// smallest IRI.
pub fn subclass_cycles(graph: &OntologyGraph) -> Vec<Vec<String>> {
    let edges = subclass_edges(graph);
    let mut cycles = Vec::new();
    for start in edges.keys() {
        let mut path = vec![start.as_str()];
        let mut on_path: HashSet<&str> = HashSet::from([start.as_str()]);
        cycles_from(start, start, &edges, &mut path, &mut on_path, &mut cycles);
        if cycles.len() >= MAX_REPORTED_CYCLES {
            cycles.truncate(MAX_REPORTED_CYCLES);
            break;
        }
    }
    cycles
}

fn cycles_from<'a>(
    start: &'a str,
    node: &'a str,
    edges: &'a BTreeMap<String, BTreeSet<String>>,
    path: &mut Vec<&'a str>,
    on_path: &mut HashSet<&'a str>,
    out: &mut Vec<Vec<String>>,
) {
    let Some(next) = edges.get(node) else {
        return;
    };
    for succ in next {
        if out.len() >= MAX_REPORTED_CYCLES {
            return;
        }
        let succ = succ.as_str();
        if succ == start {
            out.push(path.iter().map(|s| s.to_string()).collect());
        } else if succ > start && !on_path.contains(succ) {
            path.push(succ);
            on_path.insert(succ);
            cycles_from(start, succ, edges, path, on_path, out);
            on_path.remove(succ);
            path.pop();
        }
    }
}

/// Ancestors of `class` along `rdfs:subClassOf`, including itself.
fn ancestors(class: &str, edges: &BTreeMap<String, BTreeSet<String>>) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([class.to_string()]);
    let mut stack = vec![class.to_string()];
    while let Some(node) = stack.pop() {
        for parent in edges.get(&node).into_iter().flatten() {
            if seen.insert(parent.clone()) {
                stack.push(parent.clone());
            }
        }
    }
    seen
}

/// Declared disjoint pairs, each stored with the smaller IRI first.
pub fn disjoint_pairs(graph: &OntologyGraph) -> BTreeSet<(String, String)> {
    let ordered = |a: &str, b: &str| {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    };
    let mut pairs = BTreeSet::new();
    for t in graph.iter() {
        if t.predicate_iri() == vocab::OWL_DISJOINT_WITH {
            if let (Some(a), Some(b)) = (t.subject.as_iri(), t.object.as_iri()) {
                pairs.insert(ordered(a, b));
            }
        }
        if t.predicate_iri() == vocab::RDF_TYPE
            && t.object.as_iri() == Some(vocab::OWL_ALL_DISJOINT_CLASSES)
        {
            let members: Vec<String> = graph
                .objects(&t.subject, vocab::OWL_MEMBERS)
                .flat_map(|head| graph.list_items(head))
                .filter_map(|m| m.as_iri().map(str::to_string))
                .collect();
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    if a != b {
                        pairs.insert(ordered(a, b));
                    }
                }
            }
        }
    }
    pairs
}

fn asserted_types(graph: &OntologyGraph, individual: &str) -> BTreeSet<String> {
    graph
        .objects(&Term::Iri(individual.to_string()), vocab::RDF_TYPE)
        .filter_map(Term::as_iri)
        .filter(|ty| !vocab::is_builtin(ty))
        .map(str::to_string)
        .collect()
}

pub fn check_consistency(graph: &OntologyGraph) -> Vec<Finding> {
    let mut findings = Vec::new();
    for cycle in subclass_cycles(graph) {
        let mut shown = cycle.clone();
        shown.push(cycle[0].clone());
        findings.push(Finding::new(
            FindingKind::Inconsistency,
            "CYCLE",
            format!("circular subclass axioms: {}", shown.join(" -> ")),
            cycle,
        ));
    }

    let edges = subclass_edges(graph);
    let disjoint = disjoint_pairs(graph);
    let closure = |classes: &BTreeSet<String>| -> BTreeSet<String> {
        classes.iter().flat_map(|c| ancestors(c, &edges)).collect()
    };
    for individual in individuals(graph) {
        let types = closure(&asserted_types(graph, &individual));
        for (a, b) in &disjoint {
            if types.contains(a) && types.contains(b) {
                findings.push(Finding::new(
                    FindingKind::Inconsistency,
                    "DISJOINT_VIOLATION",
                    format!("<{individual}> is an instance of disjoint classes <{a}> and <{b}>"),
                    [individual.clone(), a.clone(), b.clone()],
                ));
            }
        }
        let subject = Term::Iri(individual.clone());
        let used: BTreeSet<String> = graph
            .outgoing(&subject)
            .filter(|t| t.predicate_iri() != vocab::RDF_TYPE)
            .map(|t| t.predicate_iri().to_string())
            .collect();
        for property in used {
            let domains: BTreeSet<String> = graph
                .objects(&Term::Iri(property.clone()), vocab::RDFS_DOMAIN)
                .filter_map(Term::as_iri)
                .map(str::to_string)
                .collect();
            let domain_closure = closure(&domains);
            let clash = disjoint.iter().find(|(a, b)| {
                (domain_closure.contains(a) && types.contains(b))
                    || (domain_closure.contains(b) && types.contains(a))
            });
            if let Some((a, b)) = clash {
                findings.push(Finding::new(
                    FindingKind::Inconsistency,
                    "DOMAIN_CLASH",
                    format!(
                        "<{individual}> uses <{property}>, whose domain is disjoint with one of its types (<{a}> / <{b}>)"
                    ),
                    [individual.clone(), property.clone()],
                ));
            }
        }
    }
    sort_findings(&mut findings);
    findings
}

fn has_annotation(graph: &OntologyGraph, iri: &str, predicate: &str) -> bool {
    graph
        .objects(&Term::Iri(iri.to_string()), predicate)
        .next()
        .is_some()
}

pub fn detect_pitfalls(graph: &OntologyGraph, config: &PitfallConfig) -> Vec<Finding> {
    let mut findings = Vec::new();

    let mut children: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (sub, parents) in subclass_edges(graph) {
        if vocab::is_builtin(&sub) {
            continue;
        }
        for parent in parents {
            if parent != sub && !vocab::is_builtin(&parent) {
                children.entry(parent).or_default().insert(sub.clone());
            }
        }
    }
    let disjoint = disjoint_pairs(graph);
    for (parent, siblings) in children {
        if siblings.len() < 2 {
            continue;
        }
        let any_disjoint = disjoint
            .iter()
            .any(|(a, b)| siblings.contains(a) && siblings.contains(b));
        if !any_disjoint {
            findings.push(Finding::new(
                FindingKind::Pitfall,
                "MISSING_DISJOINTNESS",
                format!("subclasses of <{parent}> have no disjointness axioms between them"),
                siblings,
            ));
        }
    }

    let classes = declared_classes(graph);
    let properties = declared_properties(graph);
    for iri in classes.iter().chain(&properties) {
        if !has_annotation(graph, iri, vocab::RDFS_LABEL) {
            findings.push(Finding::new(
                FindingKind::Pitfall,
                "MISSING_LABEL",
                format!("<{iri}> has no rdfs:label"),
                [iri.clone()],
            ));
        }
        if !has_annotation(graph, iri, vocab::RDFS_COMMENT) {
            findings.push(Finding::new(
                FindingKind::Pitfall,
                "MISSING_COMMENT",
                format!("<{iri}> has no rdfs:comment"),
                [iri.clone()],
            ));
        }
    }

    for pair in duplicate_property_candidates(graph, config.duplicate_threshold) {
        findings.push(Finding::new(
            FindingKind::Pitfall,
            "DUPLICATE_PROPERTY",
            format!(
                "<{}> and <{}> look like the same property (similarity {:.4})",
                pair.first, pair.second, pair.normalized_similarity
            ),
            [pair.first, pair.second],
        ));
    }

    for iri in &properties {
        let missing: Vec<&str> = [("domain", vocab::RDFS_DOMAIN), ("range", vocab::RDFS_RANGE)]
            .into_iter()
            .filter(|(_, p)| !has_annotation(graph, iri, p))
            .map(|(name, _)| name)
            .collect();
        if !missing.is_empty() {
            findings.push(Finding::new(
                FindingKind::Pitfall,
                "MISSING_DOMAIN_RANGE",
                format!("<{iri}> has no {}", missing.join(" and no ")),
                [iri.clone()],
            ));
        }
    }
    sort_findings(&mut findings);
    findings
}

/// Replies that have not yet parsed, as syntax findings.
pub fn syntax_findings(pending: &[PendingFragment]) -> Vec<Finding> {
    pending
        .iter()
        .map(|p| {
            Finding::new(
                FindingKind::Syntax,
                "SYNTAX_ERROR",
                format!("reply to {}: {}", p.stage.code(), p.error),
                [],
            )
        })
        .collect()
}

/// Consistency and pitfall findings for a graph.
pub fn verify_graph(graph: &OntologyGraph, config: &PitfallConfig) -> VerificationReport {
    let mut findings = check_consistency(graph);
    findings.extend(detect_pitfalls(graph, config));
    VerificationReport::new(findings)
}

/// Full report for a pipeline state, including unparsed replies.
pub fn verify_state(state: &PipelineState, config: &PitfallConfig) -> VerificationReport {
    let mut findings = syntax_findings(&state.pending_fragments);
    findings.extend(check_consistency(&state.working_graph));
    findings.extend(detect_pitfalls(&state.working_graph, config));
    VerificationReport::new(findings)
}

fn findings_of(kind: FindingKind, state: &PipelineState, config: &PitfallConfig) -> Vec<Finding> {
    match kind {
        FindingKind::Syntax => syntax_findings(&state.pending_fragments),
        FindingKind::Inconsistency => check_consistency(&state.working_graph),
        FindingKind::Pitfall => detect_pitfalls(&state.working_graph, config),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionConfig {
    /// Rounds allowed per finding kind.
    pub max_rounds: u32,
    pub pitfalls: PitfallConfig,
}

impl Default for CorrectionConfig {
    fn default() -> Self {
        CorrectionConfig {
            max_rounds: 3,
            pitfalls: PitfallConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RoundOutcome {
    Accepted,
    Rejected { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub kind: FindingKind,
    /// 1-based round number for this kind.
    pub round: u32,
    /// Prompts sent in this round; two when the guard asked for a retry.
    pub prompts: u32,
    pub findings_before: usize,
    pub findings_after: usize,
    /// Why earlier attempts in this round were turned down by the guard.
    pub retried_after: Option<String>,
    pub outcome: RoundOutcome,
}

#[derive(Debug)]
pub struct CorrectionOutcome {
    pub state: PipelineState,
    pub report: VerificationReport,
    pub rounds: Vec<RoundLog>,
    /// Kinds that still have findings after their last allowed round.
    pub exhausted: Vec<FindingKind>,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

/// A correction reply that failed evaluation.
enum Verdict {
    Accept(OntologyGraph),
    /// Class or object-property count dropped; worth one retry.
    Shrinks(String),
    Reject(String),
}

/// Repeatedly address the first finding kind (syntax, then inconsistency,
/// then pitfall) that still has findings and rounds left. Each round sends
/// one prompt built from all findings of that kind.
///
/// For inconsistency and pitfall rounds, the reply replaces the radius-1
/// fragment around the affected IRIs. The round is rejected, keeping the
/// previous graph, when the reply does not parse, when it raises the number
/// of findings of that kind, or when it lowers the class or object-property
/// count. The last case is retried once with the reason added to the prompt.
pub fn correction_loop(
    mut state: PipelineState,
    session: &mut Session,
    templates: &TemplateSet,
    config: &CorrectionConfig,
) -> Result<CorrectionOutcome, VerifyError> {
    let mut rounds = Vec::new();
    loop {
        let next = FindingKind::ALL.into_iter().find_map(|kind| {
            let findings = findings_of(kind, &state, &config.pitfalls);
            (!findings.is_empty() && state.rounds_used(kind) < config.max_rounds)
                .then_some((kind, findings))
        });
        let Some((kind, findings)) = next else {
            break;
        };
        let round = state.rounds_used(kind) + 1;
        state.correction_rounds_used.insert(kind, round);
        let log = match kind {
            FindingKind::Syntax => syntax_round(&mut state, session, templates, round)?,
            _ => repair_round(
                &mut state, session, templates, config, kind, &findings, round,
            )?,
        };
        tracing::info!(kind = %kind, round, outcome = ?log.outcome, "correction round");
        rounds.push(log);
    }
    let report = verify_state(&state, &config.pitfalls);
    let exhausted = FindingKind::ALL
        .into_iter()
        .filter(|k| report.count(*k) > 0)
        .collect();
    Ok(CorrectionOutcome {
        state,
        report,
        rounds,
        exhausted,
    })
}

fn syntax_round(
    state: &mut PipelineState,
    session: &mut Session,
    templates: &TemplateSet,
    round: u32,
) -> Result<RoundLog, VerifyError> {
    let before = state.pending_fragments.len();
    let context = ErrorContext {
        error_message: state
            .pending_fragments
            .iter()
            .map(|p| p.error.clone())
            .collect::<Vec<_>>()
            .join("\n"),
        affected_fragment: state
            .pending_fragments
            .iter()
            .map(|p| p.text.trim().to_string())
            .collect::<Vec<_>>()
            .join("\n\n"),
    };
    let prompt = templates.render(StageId::FixSyntax, state, Some(&context))?;
    let reply = session.send(&prompt)?;
    state.complete(StageId::FixSyntax)?;
    let outcome = match parse_fragment(&state.working_graph, &reply)
        .and_then(|g| state.working_graph.union(&g).map_err(PromptError::from))
    {
        Ok(merged) => {
            state.working_graph = merged;
            state.pending_fragments.clear();
            RoundOutcome::Accepted
        }
        Err(err) => {
            state.pending_fragments = vec![PendingFragment {
                stage: StageId::FixSyntax,
                text: reply,
                error: err.to_string(),
            }];
            RoundOutcome::Rejected {
                reason: format!("corrected text still fails: {err}"),
            }
        }
    };
    Ok(RoundLog {
        kind: FindingKind::Syntax,
        round,
        prompts: 1,
        findings_before: before,
        findings_after: state.pending_fragments.len(),
        retried_after: None,
        outcome,
    })
}

fn repair_round(
    state: &mut PipelineState,
    session: &mut Session,
    templates: &TemplateSet,
    config: &CorrectionConfig,
    kind: FindingKind,
    findings: &[Finding],
    round: u32,
) -> Result<RoundLog, VerifyError> {
    let affected: BTreeSet<String> = findings
        .iter()
        .flat_map(|f| f.affected.iter().cloned())
        .collect();
    let fragment = fragment_graph(&state.working_graph, &affected, 1);
    let mut context = ErrorContext {
        error_message: findings
            .iter()
            .map(|f| format!("{}: {}", f.code, f.message))
            .collect::<Vec<_>>()
            .join("\n"),
        affected_fragment: if fragment.is_empty() {
            "(no triples mention the affected entities)".to_string()
        } else {
            serialize(&fragment)
        },
    };
    let before = findings.len();
    let mut prompts = 0;
    let mut retried_after = None;
    let outcome = loop {
        let prompt = templates.render(kind.stage(), state, Some(&context))?;
        let reply = session.send(&prompt)?;
        prompts += 1;
        state.complete(kind.stage())?;
        match evaluate_repair(state, &fragment, &reply, kind, before, config) {
            Verdict::Accept(graph) => {
                state.working_graph = graph;
                break RoundOutcome::Accepted;
            }
            Verdict::Shrinks(reason) if retried_after.is_none() => {
                retried_after = Some(reason.clone());
                context.error_message = format!(
                    "{}\n\nYour previous correction was rejected: {reason}. Keep every existing class and object property.",
                    context.error_message
                );
            }
            Verdict::Shrinks(reason) | Verdict::Reject(reason) => {
                break RoundOutcome::Rejected { reason }
            }
        }
    };
    Ok(RoundLog {
        kind,
        round,
        prompts,
        findings_before: before,
        findings_after: findings_of(kind, state, &config.pitfalls).len(),
        retried_after,
        outcome,
    })
}

fn evaluate_repair(
    state: &PipelineState,
    fragment: &OntologyGraph,
    reply: &str,
    kind: FindingKind,
    before: usize,
    config: &CorrectionConfig,
) -> Verdict {
    let replacement = match parse_fragment(&state.working_graph, reply) {
        Ok(g) => g,
        Err(err) => return Verdict::Reject(format!("reply does not parse: {err}")),
    };
    let mut candidate = state.working_graph.clone();
    candidate.retain(|t| !fragment.contains(t));
    if let Err(err) = candidate.absorb(&replacement) {
        return Verdict::Reject(format!("reply cannot be merged: {err}"));
    }
    let old = compute_metrics(&state.working_graph);
    let new = compute_metrics(&candidate);
    if new.class_count < old.class_count {
        return Verdict::Shrinks(format!(
            "it would reduce the class count from {} to {}",
            old.class_count, new.class_count
        ));
    }
    if new.object_property_count < old.object_property_count {
        return Verdict::Shrinks(format!(
            "it would reduce the object property count from {} to {}",
            old.object_property_count, new.object_property_count
        ));
    }
    let mut probe = state.clone();
    probe.working_graph = candidate;
    let after = findings_of(kind, &probe, &config.pitfalls).len();
    if after > before {
        return Verdict::Reject(format!(
            "it would raise the {kind} findings from {before} to {after}"
        ));
    }
    Verdict::Accept(probe.working_graph)
}
