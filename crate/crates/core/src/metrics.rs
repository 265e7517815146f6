//! Count metrics, gap evaluation against targets, hierarchy depth and
//! near-duplicate property detection.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::align::{best_label, normalize_label, similarity};
use crate::model::{OntologyGraph, OntologyMetrics, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cyclic subclass hierarchy: {}", .0.join(" -> "))]
    CyclicHierarchy(Vec<String>),
}

const LOGICAL_PREDICATES: [&str; 6] = [
    vocab::RDFS_SUBCLASS_OF,
    vocab::OWL_EQUIVALENT_CLASS,
    vocab::OWL_DISJOINT_WITH,
    vocab::RDFS_DOMAIN,
    vocab::RDFS_RANGE,
    vocab::OWL_INVERSE_OF,
];

fn type_object(t: &Triple) -> Option<&str> {
    if t.predicate_iri() == vocab::RDF_TYPE {
        t.object.as_iri()
    } else {
        None
    }
}

/// Whether a triple is a logical axiom rather than a declaration or
/// annotation. Class declarations count, as do class assertions, property
/// characteristics and `owl:AllDisjointClasses` axioms.
pub fn is_logical_axiom(t: &Triple) -> bool {
    if LOGICAL_PREDICATES.contains(&t.predicate_iri()) {
        return true;
    }
    match type_object(t) {
        Some(ty) => {
            ty == vocab::OWL_CLASS
                || ty == vocab::RDFS_CLASS
                || ty == vocab::OWL_ALL_DISJOINT_CLASSES
                || vocab::PROPERTY_CHARACTERISTICS.contains(&ty)
                || !vocab::is_builtin(ty)
        }
        None => false,
    }
}

/// Named classes: declared `owl:Class`/`rdfs:Class`, used as the type of an
/// individual, or on either side of `rdfs:subClassOf`. Standard-vocabulary
/// IRIs such as `owl:Thing` are never counted.
pub fn declared_classes(graph: &OntologyGraph) -> BTreeSet<String> {
    let mut classes = BTreeSet::new();
    let mut add = |term: &Term| {
        if let Some(iri) = term.as_iri() {
            if !vocab::is_builtin(iri) {
                classes.insert(iri.to_string());
            }
        }
    };
    for t in graph.iter() {
        match type_object(t) {
            Some(ty) if ty == vocab::OWL_CLASS || ty == vocab::RDFS_CLASS => add(&t.subject),
            Some(ty) if !vocab::is_builtin(ty) => add(&t.object),
            _ => {}
        }
        if t.predicate_iri() == vocab::RDFS_SUBCLASS_OF {
            add(&t.subject);
            add(&t.object);
        }
    }
    classes
}

fn typed_subjects(graph: &OntologyGraph, accept: impl Fn(&str) -> bool) -> BTreeSet<String> {
    graph
        .iter()
        .filter(|t| type_object(t).is_some_and(&accept))
        .filter_map(|t| t.subject.as_iri())
        .filter(|iri| !vocab::is_builtin(iri))
        .map(str::to_string)
        .collect()
}

/// Object properties: declared as such, or typed with a characteristic that
/// only object properties can carry.
pub fn object_properties(graph: &OntologyGraph) -> BTreeSet<String> {
    typed_subjects(graph, |ty| {
        ty == vocab::OWL_OBJECT_PROPERTY || vocab::OBJECT_PROPERTY_CHARACTERISTICS.contains(&ty)
    })
}

pub fn data_properties(graph: &OntologyGraph) -> BTreeSet<String> {
    typed_subjects(graph, |ty| ty == vocab::OWL_DATATYPE_PROPERTY)
}

pub fn annotation_properties(graph: &OntologyGraph) -> BTreeSet<String> {
    typed_subjects(graph, |ty| ty == vocab::OWL_ANNOTATION_PROPERTY)
}

/// Object and data properties together.
pub fn declared_properties(graph: &OntologyGraph) -> BTreeSet<String> {
    let mut props = object_properties(graph);
    props.extend(data_properties(graph));
    props
}

/// `owl:NamedIndividual` subjects and subjects of class assertions.
pub fn individuals(graph: &OntologyGraph) -> BTreeSet<String> {
    typed_subjects(graph, |ty| {
        ty == vocab::OWL_NAMED_INDIVIDUAL || !vocab::is_builtin(ty)
    })
}

pub fn compute_metrics(graph: &OntologyGraph) -> OntologyMetrics {
    let count_pred = |p: &str| graph.iter().filter(|t| t.predicate_iri() == p).count() as u64;
    let all_disjoint = graph
        .iter()
        .filter(|t| type_object(t) == Some(vocab::OWL_ALL_DISJOINT_CLASSES))
        .count() as u64;
    OntologyMetrics {
        axiom_count: graph.len() as u64,
        logical_axiom_count: graph.iter().filter(|t| is_logical_axiom(t)).count() as u64,
        class_count: declared_classes(graph).len() as u64,
        subclass_of_count: count_pred(vocab::RDFS_SUBCLASS_OF),
        equivalent_classes_count: count_pred(vocab::OWL_EQUIVALENT_CLASS),
        disjoint_classes_count: count_pred(vocab::OWL_DISJOINT_WITH) + all_disjoint,
        object_property_count: object_properties(graph).len() as u64,
        data_property_count: data_properties(graph).len() as u64,
        annotation_property_count: annotation_properties(graph).len() as u64,
        individual_count: individuals(graph).len() as u64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MetricGap {
    pub name: &'static str,
    pub actual: u64,
    pub target: u64,
    pub deficit: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    /// One entry per metric, in field order.
    pub metrics: Vec<MetricGap>,
    pub subclass_rule_satisfied: bool,
    /// How many more `rdfs:subClassOf` axioms the actual ontology needs to
    /// reach `class_count - 1`.
    pub subclass_rule_deficit: u64,
}

impl GapReport {
    pub fn deficit(&self, name: &str) -> Option<u64> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.deficit)
    }

    pub fn to_report(&self) -> String {
        let mut out = String::new();
        for m in &self.metrics {
            out.push_str(&format!(
                "{}: actual={} target={} deficit={}\n",
                m.name, m.actual, m.target, m.deficit
            ));
        }
        out.push_str(&format!(
            "subclass_rule: {} (deficit={})\n",
            if self.subclass_rule_satisfied {
                "satisfied"
            } else {
                "violated"
            },
            self.subclass_rule_deficit
        ));
        out
    }
}

pub fn gap_report(actual: &OntologyMetrics, target: &OntologyMetrics) -> GapReport {
    let metrics = actual
        .fields()
        .iter()
        .zip(target.fields())
        .map(|(&(name, a), (_, t))| MetricGap {
            name,
            actual: a,
            target: t,
            deficit: t.saturating_sub(a),
        })
        .collect();
    let required = actual.class_count.saturating_sub(1);
    GapReport {
        metrics,
        subclass_rule_satisfied: actual.subclass_of_count >= required,
        subclass_rule_deficit: required.saturating_sub(actual.subclass_of_count),
    }
}

/// Length, in classes, of the longest `rdfs:subClassOf` chain between named
/// classes. A lone class has depth 1 and an empty graph depth 0.
pub fn hierarchy_depth(graph: &OntologyGraph) -> Result<usize, MetricsError> {
    let classes = declared_classes(graph);
    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for t in graph.iter() {
        if t.predicate_iri() != vocab::RDFS_SUBCLASS_OF {
            continue;
        }
        if let (Some(sub), Some(sup)) = (t.subject.as_iri(), t.object.as_iri()) {
            if classes.contains(sub) && classes.contains(sup) {
                parents.entry(sub).or_default().push(sup);
            }
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done(usize),
    }
    fn visit<'a>(
        node: &'a str,
        parents: &BTreeMap<&'a str, Vec<&'a str>>,
        marks: &mut HashMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Result<usize, MetricsError> {
        match marks.get(node) {
            Some(Mark::Done(depth)) => return Ok(*depth),
            Some(Mark::Active) => {
                let start = stack.iter().position(|n| *n == node).unwrap_or(0);
                let mut cycle: Vec<String> = stack[start..].iter().map(|s| s.to_string()).collect();
                cycle.push(node.to_string());
                return Err(MetricsError::CyclicHierarchy(cycle));
            }
            None => {}
        }
        marks.insert(node, Mark::Active);
        stack.push(node);
        let mut best = 0;
        for parent in parents.get(node).map(Vec::as_slice).unwrap_or(&[]) {
            best = best.max(visit(parent, parents, marks, stack)?);
        }
        stack.pop();
        marks.insert(node, Mark::Done(best + 1));
        Ok(best + 1)
    }
    let mut marks = HashMap::new();
    let mut depth = 0;
    for class in &classes {
        depth = depth.max(visit(class, &parents, &mut marks, &mut Vec::new())?);
    }
    Ok(depth)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicatePropertyPair {
    /// The lexicographically smaller IRI.
    pub first: String,
    pub second: String,
    pub normalized_similarity: f64,
}

/// Unordered pairs of object/data properties whose normalized labels are at
/// least `threshold` similar, most similar first.
pub fn duplicate_property_candidates(
    graph: &OntologyGraph,
    threshold: f64,
) -> Vec<DuplicatePropertyPair> {
    let labelled: Vec<(String, String)> = declared_properties(graph)
        .into_iter()
        .map(|iri| {
            let label = normalize_label(&best_label(graph, &iri));
            (iri, label)
        })
        .collect();
    let mut pairs = Vec::new();
    for (i, (a, la)) in labelled.iter().enumerate() {
        for (b, lb) in &labelled[i + 1..] {
            let score = similarity(la, lb);
            if score >= threshold {
                pairs.push(DuplicatePropertyPair {
                    first: a.clone(),
                    second: b.clone(),
                    normalized_similarity: score,
                });
            }
        }
    }
    pairs.sort_by(|x, y| {
        y.normalized_similarity
            .total_cmp(&x.normalized_similarity)
            .then_with(|| x.first.cmp(&y.first))
            .then_with(|| x.second.cmp(&y.second))
    });
    pairs
}
