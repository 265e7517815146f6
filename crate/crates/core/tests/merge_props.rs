mod common;

use std::collections::{BTreeSet, HashSet};

use common::gen;
use ontogen::fuse::{merge, AnnotationPrecedence, MergePolicy};
use ontogen::{OntologyGraph, Triple};
use proptest::prelude::*;

const ANNOTATION_PREDICATES: [&str; 2] = [
    "http://www.w3.org/2000/01/rdf-schema#label",
    "http://www.w3.org/2000/01/rdf-schema#comment",
];

fn annotation_key(t: &Triple) -> Option<(String, String)> {
    let p = t.predicate_iri();
    (ANNOTATION_PREDICATES.contains(&p) && t.object.is_literal())
        .then(|| (t.subject.as_iri().unwrap().to_string(), p.to_string()))
}

fn keys(g: &OntologyGraph) -> BTreeSet<(String, String)> {
    g.iter().filter_map(annotation_key).collect()
}

/// Triples of a foundation-wins merge of two blank-free graphs, computed
/// directly from the precedence rule.
fn expected_foundation_wins(a: &OntologyGraph, b: &OntologyGraph) -> HashSet<Triple> {
    let taken = keys(a);
    a.iter()
        .cloned()
        .chain(
            b.iter()
                .filter(|t| annotation_key(t).is_none_or(|k| !taken.contains(&k)))
                .cloned(),
        )
        .collect()
}

fn policy(precedence: AnnotationPrecedence) -> MergePolicy {
    MergePolicy {
        annotation_precedence: precedence,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn foundation_wins_union(a in gen::graph(30, false), b in gen::graph(30, false)) {
        let merged = merge(&a, std::slice::from_ref(&b), &MergePolicy::default()).unwrap();
        let triples: HashSet<Triple> = merged.iter().cloned().collect();
        prop_assert_eq!(triples, expected_foundation_wins(&a, &b));
    }

    #[test]
    fn without_annotation_overlap_merge_is_plain_union(a in gen::graph(30, false), b in gen::graph(30, false)) {
        prop_assume!(keys(&a).is_disjoint(&keys(&b)));
        let merged = merge(&a, std::slice::from_ref(&b), &MergePolicy::default()).unwrap();
        let union: HashSet<&Triple> = a.iter().chain(b.iter()).collect();
        prop_assert_eq!(merged.len(), union.len());
    }

    #[test]
    fn addition_wins_mirrors_foundation_wins(a in gen::graph(30, false), b in gen::graph(30, false)) {
        let addition_wins = merge(&a, std::slice::from_ref(&b), &policy(AnnotationPrecedence::AdditionWins)).unwrap();
        let swapped = merge(&b, std::slice::from_ref(&a), &MergePolicy::default()).unwrap();
        prop_assert_eq!(addition_wins, swapped);
    }

    #[test]
    fn idempotent(a in gen::graph(40, true)) {
        prop_assert_eq!(merge(&a, std::slice::from_ref(&a), &MergePolicy::default()).unwrap(), a);
    }

    #[test]
    fn empty_addition_is_identity(a in gen::graph(40, true)) {
        prop_assert_eq!(&merge(&a, &[OntologyGraph::new()], &MergePolicy::default()).unwrap(), &a);
        prop_assert_eq!(&merge(&a, &[], &MergePolicy::default()).unwrap(), &a);
    }

    #[test]
    fn blank_nodes_of_inputs_stay_apart(a in gen::graph(20, true), b in gen::graph(20, true)) {
        let merged = merge(&a, std::slice::from_ref(&b), &MergePolicy::default()).unwrap();
        prop_assert!(merged.len() <= a.len() + b.len());
        prop_assert!(merged.len() >= a.len());
    }
}
