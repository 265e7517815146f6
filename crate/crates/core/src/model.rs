//! RDF terms, triples, prefix maps and the ontology graph every pipeline
//! stage reads and writes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed triple: {0}")]
    MalformedTriple(String),
    #[error("unbound prefix `{0}`")]
    UnboundPrefix(String),
    #[error("prefix `{label}` already bound to <{existing}>, cannot rebind to <{requested}>")]
    PrefixConflict {
        label: String,
        existing: String,
        requested: String,
    },
    #[error("not an absolute IRI: `{0}`")]
    RelativeIri(String),
}

/// Annotation carried by a literal: nothing, a datatype, or a language tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralKind {
    Plain,
    Typed(String),
    Lang(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub kind: LiteralKind,
}

impl Literal {
    pub fn plain(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Plain,
        }
    }

    /// Typed literal. `xsd:string` collapses to a plain literal, which is the
    /// same RDF term.
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        let kind = if datatype == vocab::XSD_STRING {
            LiteralKind::Plain
        } else {
            LiteralKind::Typed(datatype)
        };
        Literal {
            lexical: lexical.into(),
            kind,
        }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            kind: LiteralKind::Lang(tag.into().to_ascii_lowercase()),
        }
    }

    pub fn datatype(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Typed(dt) => Some(dt),
            _ => None,
        }
    }

    pub fn language(&self) -> Option<&str> {
        match &self.kind {
            LiteralKind::Lang(tag) => Some(tag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

impl Term {
    /// An IRI term. Fails unless the IRI carries a scheme.
    pub fn iri(iri: impl Into<String>) -> Result<Self, ModelError> {
        let iri = iri.into();
        if is_absolute_iri(&iri) {
            Ok(Term::Iri(iri))
        } else {
            Err(ModelError::RelativeIri(iri))
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::Blank(label.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::plain(lexical))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&str> {
        match self {
            Term::Blank(label) => Some(label),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    /// N-Triples rendering, also used as the canonical sort key.
    pub fn to_ntriples(&self) -> String {
        match self {
            Term::Iri(iri) => format!("<{iri}>"),
            Term::Blank(label) => format!("_:{label}"),
            Term::Literal(lit) => {
                let body = format!("\"{}\"", escape_literal(&lit.lexical));
                match &lit.kind {
                    LiteralKind::Plain => body,
                    LiteralKind::Typed(dt) => format!("{body}^^<{dt}>"),
                    LiteralKind::Lang(tag) => format!("{body}@{tag}"),
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_ntriples())
    }
}

pub(crate) fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

pub fn is_absolute_iri(iri: &str) -> bool {
    match iri.find(':') {
        Some(0) | None => false,
        Some(idx) => {
            let scheme = &iri[..idx];
            scheme.starts_with(|c: char| c.is_ascii_alphabetic())
                && scheme
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, ModelError> {
        let triple = Triple {
            subject,
            predicate,
            object,
        };
        triple.validate()?;
        Ok(triple)
    }

    /// Shorthand for a triple of three IRIs.
    pub fn iris(s: &str, p: &str, o: &str) -> Result<Self, ModelError> {
        Triple::new(Term::iri(s)?, Term::iri(p)?, Term::iri(o)?)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.subject.is_literal() {
            return Err(ModelError::MalformedTriple(format!(
                "literal subject {}",
                self.subject
            )));
        }
        if !self.predicate.is_iri() {
            return Err(ModelError::MalformedTriple(format!(
                "non-IRI predicate {}",
                self.predicate
            )));
        }
        for term in [&self.subject, &self.predicate, &self.object] {
            if let Term::Iri(iri) = term {
                if !is_absolute_iri(iri) {
                    return Err(ModelError::RelativeIri(iri.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn predicate_iri(&self) -> &str {
        self.predicate.as_iri().unwrap_or_default()
    }

    pub fn mentions_blank(&self) -> bool {
        self.subject.is_blank() || self.object.is_blank()
    }

    pub(crate) fn sort_key(&self) -> (String, String, String) {
        (
            self.subject.to_ntriples(),
            self.predicate.to_ntriples(),
            self.object.to_ntriples(),
        )
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Prefix label to namespace bindings, plus an optional base IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixMap {
    entries: BTreeMap<String, String>,
    base: Option<String>,
}

impl PrefixMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Map pre-populated with `owl`, `rdf`, `rdfs` and `xsd`.
    pub fn standard() -> Self {
        let mut map = Self::new();
        for (label, ns) in vocab::STANDARD_PREFIXES {
            map.entries.insert(label.to_string(), ns.to_string());
        }
        map
    }

    /// Bind `label`. Re-binding to the same IRI is a no-op; re-binding to a
    /// different IRI fails.
    pub fn bind(&mut self, label: &str, namespace: &str) -> Result<(), ModelError> {
        match self.entries.get(label) {
            Some(existing) if existing != namespace => Err(ModelError::PrefixConflict {
                label: label.to_string(),
                existing: existing.clone(),
                requested: namespace.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                self.entries
                    .insert(label.to_string(), namespace.to_string());
                Ok(())
            }
        }
    }

    pub fn get(&self, label: &str) -> Option<&str> {
        self.entries.get(label).map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.entries.contains_key(label)
    }

    pub fn base(&self) -> Option<&str> {
        self.base.as_deref()
    }

    pub fn set_base(&mut self, base: Option<String>) {
        self.base = base;
    }

    /// Entries in label order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merge every binding of `other` into `self`, failing on the first
    /// conflicting label. `self` is left untouched on failure.
    pub fn merge(&mut self, other: &PrefixMap) -> Result<(), ModelError> {
        let mut merged = self.clone();
        for (label, ns) in other.iter() {
            merged.bind(label, ns)?;
        }
        if merged.base.is_none() {
            merged.base = other.base.clone();
        }
        *self = merged;
        Ok(())
    }

    /// Expand `label:local` into a full IRI.
    pub fn expand(&self, prefixed_name: &str) -> Result<String, ModelError> {
        let (label, local) = prefixed_name
            .split_once(':')
            .ok_or_else(|| ModelError::UnboundPrefix(prefixed_name.to_string()))?;
        let namespace = self
            .get(label)
            .ok_or_else(|| ModelError::UnboundPrefix(label.to_string()))?;
        Ok(format!("{namespace}{local}"))
    }

    /// Shortest prefixed form of `iri`, if some namespace covers it and the
    /// remaining local part is a valid Turtle local name.
    pub fn compact(&self, iri: &str) -> Option<String> {
        self.entries
            .iter()
            .filter(|(_, ns)| iri.starts_with(ns.as_str()))
            .filter(|(_, ns)| is_simple_local_name(&iri[ns.len()..]))
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then_with(|| b.0.cmp(a.0)))
            .map(|(label, ns)| format!("{label}:{}", &iri[ns.len()..]))
    }
}

/// Local names that can be written without escapes.
pub(crate) fn is_simple_local_name(local: &str) -> bool {
    if local.is_empty() {
        return true;
    }
    let mut chars = local.chars();
    let first = chars.next().unwrap();
    if !(first.is_ascii_alphanumeric() || first == '_') {
        return false;
    }
    if !local
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        return false;
    }
    !local.ends_with('.')
}

/// A set of triples with insertion order preserved, plus the prefixes used to
/// read or write it.
#[derive(Debug, Clone, Default)]
pub struct OntologyGraph {
    triples: IndexSet<Triple>,
    prefixes: PrefixMap,
    next_blank: usize,
}

impl PartialEq for OntologyGraph {
    /// Triple-set equality; prefixes and insertion order are presentation.
    fn eq(&self, other: &Self) -> bool {
        self.triples.len() == other.triples.len()
            && self.triples.iter().all(|t| other.triples.contains(t))
    }
}

impl Eq for OntologyGraph {}

impl OntologyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prefixes(prefixes: PrefixMap) -> Self {
        OntologyGraph {
            prefixes,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn prefixes(&self) -> &PrefixMap {
        &self.prefixes
    }

    pub fn prefixes_mut(&mut self) -> &mut PrefixMap {
        &mut self.prefixes
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    /// Insert a triple, returning whether it was new.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, ModelError> {
        triple.validate()?;
        if let Some(label) = triple.subject.as_blank() {
            self.observe_blank(label);
        }
        if let Some(label) = triple.object.as_blank() {
            self.observe_blank(label);
        }
        Ok(self.triples.insert(triple))
    }

    /// Value-returning insertion; the input graph is left as it was.
    pub fn add_triple(&self, triple: Triple) -> Result<OntologyGraph, ModelError> {
        let mut next = self.clone();
        next.insert(triple)?;
        Ok(next)
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.shift_remove(triple)
    }

    pub fn retain(&mut self, keep: impl FnMut(&Triple) -> bool) {
        self.triples.retain(keep);
    }

    /// A blank-node label not used in this graph, following the `b<k>`
    /// insertion-order scheme.
    pub fn fresh_blank(&mut self) -> Term {
        let label = format!("b{}", self.next_blank);
        self.next_blank += 1;
        Term::Blank(label)
    }

    fn observe_blank(&mut self, label: &str) {
        if let Some(k) = label
            .strip_prefix('b')
            .and_then(|n| n.parse::<usize>().ok())
        {
            if k >= self.next_blank {
                self.next_blank = k + 1;
            }
        }
    }

    /// Union `other` into `self`.
    ///
    /// Blank nodes of `other` are relabelled with fresh labels in their order
    /// of first appearance. A connected group of blank nodes in `other` whose
    /// triples already occur in `self` under some renaming is dropped, so
    /// absorbing the same fragment twice is a no-op.
    pub fn absorb(&mut self, other: &OntologyGraph) -> Result<(), ModelError> {
        self.prefixes.merge(&other.prefixes)?;
        let redundant = redundant_blank_components(self, other);
        let mut relabel: HashMap<String, Term> = HashMap::new();
        for triple in other.iter() {
            if mentions_any(triple, &redundant) {
                continue;
            }
            let mut map_term = |term: &Term, graph: &mut OntologyGraph| -> Term {
                match term {
                    Term::Blank(label) => relabel
                        .entry(label.clone())
                        .or_insert_with(|| graph.fresh_blank())
                        .clone(),
                    other => other.clone(),
                }
            };
            let subject = map_term(&triple.subject, self);
            let object = map_term(&triple.object, self);
            self.insert(Triple {
                subject,
                predicate: triple.predicate.clone(),
                object,
            })?;
        }
        Ok(())
    }

    pub fn union(&self, other: &OntologyGraph) -> Result<OntologyGraph, ModelError> {
        let mut next = self.clone();
        next.absorb(other)?;
        Ok(next)
    }

    /// Triples with the given subject.
    pub fn outgoing<'a>(&'a self, subject: &'a Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.triples.iter().filter(move |t| &t.subject == subject)
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate_iri() == predicate)
            .map(|t| &t.object)
    }

    /// IRI subjects of `(?, rdf:type, type_iri)`.
    pub fn subjects_of_type(&self, type_iri: &str) -> BTreeSet<String> {
        self.triples
            .iter()
            .filter(|t| t.predicate_iri() == vocab::RDF_TYPE && t.object.as_iri() == Some(type_iri))
            .filter_map(|t| t.subject.as_iri().map(str::to_string))
            .collect()
    }

    /// Items of an RDF collection starting at `head`. Stops on malformed or
    /// cyclic lists.
    pub fn list_items(&self, head: &Term) -> Vec<Term> {
        let mut items = Vec::new();
        let mut seen = HashSet::new();
        let mut node = head.clone();
        while node.as_iri() != Some(vocab::RDF_NIL) && seen.insert(node.clone()) {
            let Some(first) = self.objects(&node, vocab::RDF_FIRST).next().cloned() else {
                break;
            };
            items.push(first);
            let rest = self.objects(&node, vocab::RDF_REST).next().cloned();
            match rest {
                Some(rest) => node = rest,
                None => break,
            }
        }
        items
    }

    pub fn blank_nodes(&self) -> BTreeSet<String> {
        self.triples
            .iter()
            .flat_map(|t| [&t.subject, &t.object])
            .filter_map(|t| t.as_blank().map(str::to_string))
            .collect()
    }

    /// Graph isomorphism: equal up to a bijective renaming of blank nodes.
    ///
    /// Exhaustive backtracking over blank-node assignments, pruned by a
    /// per-node signature; intended for graphs with a few dozen blank nodes.
    pub fn is_isomorphic(&self, other: &OntologyGraph) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let ground_a: HashSet<&Triple> = self.iter().filter(|t| !t.mentions_blank()).collect();
        let ground_b: HashSet<&Triple> = other.iter().filter(|t| !t.mentions_blank()).collect();
        if ground_a != ground_b {
            return false;
        }
        let blanks_a: Vec<String> = self.blank_nodes().into_iter().collect();
        let blanks_b: Vec<String> = other.blank_nodes().into_iter().collect();
        if blanks_a.len() != blanks_b.len() {
            return false;
        }
        let sig_a: HashMap<&str, BlankSignature> = blanks_a
            .iter()
            .map(|b| (b.as_str(), BlankSignature::of(self, b)))
            .collect();
        let sig_b: HashMap<&str, BlankSignature> = blanks_b
            .iter()
            .map(|b| (b.as_str(), BlankSignature::of(other, b)))
            .collect();
        let blank_triples_b: HashSet<&Triple> =
            other.iter().filter(|t| t.mentions_blank()).collect();
        let blank_triples_a: Vec<&Triple> = self.iter().filter(|t| t.mentions_blank()).collect();

        let mut mapping: HashMap<String, String> = HashMap::new();
        let mut used: HashSet<String> = HashSet::new();
        search_bijection(
            0,
            &blanks_a,
            &blanks_b,
            &sig_a,
            &sig_b,
            &blank_triples_a,
            &blank_triples_b,
            &mut mapping,
            &mut used,
        )
    }
}

#[derive(Debug, PartialEq, Eq)]
struct BlankSignature {
    outgoing: Vec<(String, String)>,
    incoming: Vec<(String, String)>,
}

impl BlankSignature {
    fn of(graph: &OntologyGraph, label: &str) -> Self {
        let shape = |t: &Term| match t {
            Term::Blank(_) => "_".to_string(),
            other => other.to_ntriples(),
        };
        let mut outgoing = Vec::new();
        let mut incoming = Vec::new();
        for t in graph.iter() {
            if t.subject.as_blank() == Some(label) {
                outgoing.push((t.predicate.to_ntriples(), shape(&t.object)));
            }
            if t.object.as_blank() == Some(label) {
                incoming.push((t.predicate.to_ntriples(), shape(&t.subject)));
            }
        }
        outgoing.sort();
        incoming.sort();
        BlankSignature { outgoing, incoming }
    }
}

#[allow(clippy::too_many_arguments)]
fn search_bijection(
    idx: usize,
    blanks_a: &[String],
    blanks_b: &[String],
    sig_a: &HashMap<&str, BlankSignature>,
    sig_b: &HashMap<&str, BlankSignature>,
    triples_a: &[&Triple],
    triples_b: &HashSet<&Triple>,
    mapping: &mut HashMap<String, String>,
    used: &mut HashSet<String>,
) -> bool {
    if idx == blanks_a.len() {
        return true;
    }
    let a = &blanks_a[idx];
    for b in blanks_b {
        if used.contains(b) || sig_a[a.as_str()] != sig_b[b.as_str()] {
            continue;
        }
        mapping.insert(a.clone(), b.clone());
        used.insert(b.clone());
        if partial_mapping_consistent(triples_a, triples_b, mapping)
            && search_bijection(
                idx + 1,
                blanks_a,
                blanks_b,
                sig_a,
                sig_b,
                triples_a,
                triples_b,
                mapping,
                used,
            )
        {
            return true;
        }
        mapping.remove(a);
        used.remove(b);
    }
    false
}

fn partial_mapping_consistent(
    triples_a: &[&Triple],
    triples_b: &HashSet<&Triple>,
    mapping: &HashMap<String, String>,
) -> bool {
    let map = |t: &Term| -> Option<Term> {
        match t {
            Term::Blank(label) => mapping.get(label).map(|m| Term::Blank(m.clone())),
            other => Some(other.clone()),
        }
    };
    triples_a
        .iter()
        .all(|t| match (map(&t.subject), map(&t.object)) {
            (Some(subject), Some(object)) => triples_b.contains(&Triple {
                subject,
                predicate: t.predicate.clone(),
                object,
            }),
            _ => true,
        })
}

/// Structural fingerprint of the tree of triples below a blank node, or
/// `None` when the structure is cyclic.
pub(crate) fn blank_tree_signature(
    graph: &OntologyGraph,
    label: &str,
    visiting: &mut Vec<String>,
) -> Option<String> {
    if visiting.iter().any(|v| v == label) {
        return None;
    }
    visiting.push(label.to_string());
    let node = Term::Blank(label.to_string());
    let mut parts = Vec::new();
    for t in graph.outgoing(&node) {
        let object = match &t.object {
            Term::Blank(inner) => format!("[{}]", blank_tree_signature(graph, inner, visiting)?),
            other => other.to_ntriples(),
        };
        parts.push(format!("{} {}", t.predicate.to_ntriples(), object));
    }
    visiting.pop();
    parts.sort();
    Some(parts.join(";"))
}

/// Connected groups of blank nodes (linked through blank-to-blank triples),
/// each with every triple that mentions one of its nodes.
fn blank_components(graph: &OntologyGraph) -> Vec<(Vec<String>, OntologyGraph)> {
    fn find(parent: &mut HashMap<String, String>, x: &str) -> String {
        let p = parent[x].clone();
        if p == x {
            return p;
        }
        let root = find(parent, &p);
        parent.insert(x.to_string(), root.clone());
        root
    }
    let mut parent: HashMap<String, String> = graph
        .blank_nodes()
        .into_iter()
        .map(|b| (b.clone(), b))
        .collect();
    for t in graph.iter() {
        if let (Some(a), Some(b)) = (t.subject.as_blank(), t.object.as_blank()) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent.insert(ra, rb);
            }
        }
    }
    let mut components: BTreeMap<String, (Vec<String>, OntologyGraph)> = BTreeMap::new();
    for label in graph.blank_nodes() {
        let root = find(&mut parent, &label);
        components.entry(root).or_default().0.push(label);
    }
    for t in graph.iter() {
        if let Some(label) = t.subject.as_blank().or_else(|| t.object.as_blank()) {
            let root = find(&mut parent, label);
            components
                .get_mut(&root)
                .expect("every blank node has a component")
                .1
                .triples
                .insert(t.clone());
        }
    }
    components.into_values().collect()
}

/// Shape of a component with blank labels erased, used to bucket candidate
/// isomorphic components.
fn component_shape(component: &OntologyGraph) -> Vec<String> {
    let erase = |t: &Term| match t {
        Term::Blank(_) => "_".to_string(),
        other => other.to_ntriples(),
    };
    let mut shape: Vec<String> = component
        .iter()
        .map(|t| {
            format!(
                "{} {} {}",
                erase(&t.subject),
                t.predicate.to_ntriples(),
                erase(&t.object)
            )
        })
        .collect();
    shape.sort();
    shape
}

/// Blank labels of `incoming` whose component already exists in `base` up
/// to blank renaming. Each component of `base` absorbs at most one
/// incoming component.
fn redundant_blank_components(base: &OntologyGraph, incoming: &OntologyGraph) -> HashSet<String> {
    let mut redundant = HashSet::new();
    if incoming.blank_nodes().is_empty() || base.blank_nodes().is_empty() {
        return redundant;
    }
    let mut available: HashMap<Vec<String>, Vec<OntologyGraph>> = HashMap::new();
    for (_, component) in blank_components(base) {
        available
            .entry(component_shape(&component))
            .or_default()
            .push(component);
    }
    for (labels, component) in blank_components(incoming) {
        let Some(candidates) = available.get_mut(&component_shape(&component)) else {
            continue;
        };
        if let Some(i) = candidates.iter().position(|c| c.is_isomorphic(&component)) {
            candidates.swap_remove(i);
            redundant.extend(labels);
        }
    }
    redundant
}

fn mentions_any(triple: &Triple, labels: &HashSet<String>) -> bool {
    [&triple.subject, &triple.object]
        .into_iter()
        .any(|t| t.as_blank().is_some_and(|l| labels.contains(l)))
}

/// The count vector reported for an ontology.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OntologyMetrics {
    pub axiom_count: u64,
    pub logical_axiom_count: u64,
    pub class_count: u64,
    pub subclass_of_count: u64,
    pub equivalent_classes_count: u64,
    pub disjoint_classes_count: u64,
    pub object_property_count: u64,
    pub data_property_count: u64,
    pub annotation_property_count: u64,
    pub individual_count: u64,
}

impl OntologyMetrics {
    pub const FIELD_NAMES: [&'static str; 10] = [
        "axiom_count",
        "logical_axiom_count",
        "class_count",
        "subclass_of_count",
        "equivalent_classes_count",
        "disjoint_classes_count",
        "object_property_count",
        "data_property_count",
        "annotation_property_count",
        "individual_count",
    ];

    /// `(name, value)` pairs in field order.
    pub fn fields(&self) -> [(&'static str, u64); 10] {
        let values = [
            self.axiom_count,
            self.logical_axiom_count,
            self.class_count,
            self.subclass_of_count,
            self.equivalent_classes_count,
            self.disjoint_classes_count,
            self.object_property_count,
            self.data_property_count,
            self.annotation_property_count,
            self.individual_count,
        ];
        let mut out = [("", 0); 10];
        for (i, (name, value)) in Self::FIELD_NAMES.iter().zip(values).enumerate() {
            out[i] = (name, value);
        }
        out
    }

    pub fn satisfies_invariants(&self) -> bool {
        self.logical_axiom_count <= self.axiom_count
            && self.subclass_of_count + self.equivalent_classes_count + self.disjoint_classes_count
                <= self.logical_axiom_count
    }

    /// `name=value` pairs joined by `, `, as placed into prompts.
    pub fn to_prompt_text(&self) -> String {
        self.fields()
            .iter()
            .map(|(name, value)| format!("{name}={value}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// One `name: value` line per metric.
    pub fn to_report(&self) -> String {
        self.fields()
            .iter()
            .map(|(name, value)| format!("{name}: {value}\n"))
            .collect()
    }
}
