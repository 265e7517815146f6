//! Merging ontologies: a foundation graph absorbs the content of addition
//! graphs under an annotation-precedence policy.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::duplicate_property_candidates;
use crate::model::{ModelError, OntologyGraph, PrefixMap, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationPrecedence {
    #[default]
    FoundationWins,
    AdditionWins,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MergePolicy {
    pub annotation_precedence: AnnotationPrecedence,
    pub dedup_properties: bool,
    /// Only consulted when `dedup_properties` is set.
    pub duplicate_threshold: f64,
}

impl Default for MergePolicy {
    fn default() -> Self {
        MergePolicy {
            annotation_precedence: AnnotationPrecedence::FoundationWins,
            dedup_properties: false,
            duplicate_threshold: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuseError {
    #[error("prefix `{label}` is bound to <{existing}> in one input and <{requested}> in another")]
    PrefixConflict {
        label: String,
        existing: String,
        requested: String,
    },
    #[error("invalid merge policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for FuseError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::PrefixConflict {
                label,
                existing,
                requested,
            } => FuseError::PrefixConflict {
                label,
                existing,
                requested,
            },
            other => FuseError::Model(other),
        }
    }
}

/// Key of an annotation value subject to precedence: IRI subject and
/// annotation predicate, with a literal object.
fn annotation_key(t: &Triple) -> Option<(&str, &str)> {
    let subject = t.subject.as_iri()?;
    let predicate = t.predicate_iri();
    (vocab::ANNOTATION_PREDICATES.contains(&predicate) && t.object.is_literal())
        .then_some((subject, predicate))
}

/// Union of `foundation` and `additions`.
///
/// Annotation values (labels, comments, titles, descriptions, version info)
/// for a given subject and predicate come from a single input: the first one
/// that has any, in precedence order. Foundation-wins ranks the foundation
/// first and then the additions in order; addition-wins ranks the additions
/// from last to first and the foundation last. Logical triples are always
/// kept. With `dedup_properties`, groups of near-duplicate properties are
/// collapsed onto their lexicographically smallest IRI.
pub fn merge(
    foundation: &OntologyGraph,
    additions: &[OntologyGraph],
    policy: &MergePolicy,
) -> Result<OntologyGraph, FuseError> {
    if policy.dedup_properties
        && !(policy.duplicate_threshold > 0.0 && policy.duplicate_threshold <= 1.0)
    {
        return Err(FuseError::InvalidPolicy(format!(
            "duplicate_threshold {} is outside (0, 1]",
            policy.duplicate_threshold
        )));
    }
    let mut prefixes: PrefixMap = foundation.prefixes().clone();
    for addition in additions {
        prefixes.merge(addition.prefixes())?;
    }

    let inputs: Vec<&OntologyGraph> = std::iter::once(foundation).chain(additions).collect();
    let ranking: Vec<usize> = match policy.annotation_precedence {
        AnnotationPrecedence::FoundationWins => (0..inputs.len()).collect(),
        AnnotationPrecedence::AdditionWins => (1..inputs.len()).rev().chain([0]).collect(),
    };
    let mut winner: HashMap<(String, String), usize> = HashMap::new();
    for &i in &ranking {
        for t in inputs[i].iter() {
            if let Some((s, p)) = annotation_key(t) {
                winner.entry((s.to_string(), p.to_string())).or_insert(i);
            }
        }
    }
    let keep = |i: usize, t: &Triple| match annotation_key(t) {
        Some((s, p)) => winner.get(&(s.to_string(), p.to_string())) == Some(&i),
        None => true,
    };

    let mut result = foundation.clone();
    *result.prefixes_mut() = prefixes;
    result.retain(|t| keep(0, t));
    for (offset, addition) in additions.iter().enumerate() {
        let mut filtered = OntologyGraph::with_prefixes(addition.prefixes().clone());
        for t in addition.iter().filter(|t| keep(offset + 1, t)) {
            filtered.insert(t.clone())?;
        }
        result.absorb(&filtered)?;
    }

    if policy.dedup_properties {
        result = dedup_properties(&result, policy.duplicate_threshold)?;
    }
    Ok(result)
}

/// Rewrite every near-duplicate property onto the smallest IRI of its group.
pub fn dedup_properties(graph: &OntologyGraph, threshold: f64) -> Result<OntologyGraph, FuseError> {
    let pairs = duplicate_property_candidates(graph, threshold);
    if pairs.is_empty() {
        return Ok(graph.clone());
    }
    // Union-find over IRIs; the smaller IRI always becomes the root.
    let mut parent: BTreeMap<String, String> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<String, String>, x: &str) -> String {
        let p = parent.get(x).cloned().unwrap_or_else(|| x.to_string());
        if p == x {
            return p;
        }
        let root = find(parent, &p);
        parent.insert(x.to_string(), root.clone());
        root
    }
    for pair in &pairs {
        let a = find(&mut parent, &pair.first);
        let b = find(&mut parent, &pair.second);
        if a != b {
            let (small, large) = if a < b { (a, b) } else { (b, a) };
            parent.insert(large, small);
        }
    }
    let members: HashSet<String> = pairs
        .iter()
        .flat_map(|p| [p.first.clone(), p.second.clone()])
        .collect();
    let rename: HashMap<String, String> = members
        .into_iter()
        .filter_map(|iri| {
            let root = find(&mut parent, &iri);
            (root != iri).then_some((iri, root))
        })
        .collect();
    let map = |term: &Term| match term {
        Term::Iri(iri) => Term::Iri(rename.get(iri).cloned().unwrap_or_else(|| iri.clone())),
        other => other.clone(),
    };
    let mut out = OntologyGraph::with_prefixes(graph.prefixes().clone());
    for t in graph.iter() {
        out.insert(Triple {
            subject: map(&t.subject),
            predicate: map(&t.predicate),
            object: map(&t.object),
        })?;
    }
    Ok(out)
}
