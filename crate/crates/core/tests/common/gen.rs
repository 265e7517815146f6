//! Proptest strategies for small ontology graphs.

use ontogen::{Literal, OntologyGraph, PrefixMap, Term, Triple};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

pub const EX: &str = "http://example.org/ontology#";
pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

pub fn ex(local: &str) -> String {
    format!("{EX}{local}")
}

fn pick(items: Vec<String>) -> BoxedStrategy<String> {
    proptest::sample::select(items).boxed()
}

/// Entities of the example namespace, plus a few IRIs that cannot be
/// written as prefixed names.
pub fn entity() -> BoxedStrategy<String> {
    let mut items: Vec<String> = (0..8).map(|i| ex(&format!("C{i}"))).collect();
    items.extend((0..4).map(|i| ex(&format!("p{i}"))));
    items.extend((0..4).map(|i| ex(&format!("i{i}"))));
    items.extend([
        ex("has-part_1"),
        ex("3rd"),
        ex("a.b"),
        "http://other.org/vocab/Thing".to_string(),
        "urn:isbn:0451450523".to_string(),
    ]);
    pick(items)
}

pub fn predicate() -> BoxedStrategy<String> {
    let mut items = vec![
        format!("{RDF}type"),
        format!("{RDFS}subClassOf"),
        format!("{OWL}equivalentClass"),
        format!("{OWL}disjointWith"),
        format!("{RDFS}domain"),
        format!("{RDFS}range"),
        format!("{OWL}inverseOf"),
        format!("{RDFS}label"),
        format!("{RDFS}comment"),
    ];
    items.extend((0..4).map(|i| ex(&format!("p{i}"))));
    pick(items)
}

pub fn type_object() -> BoxedStrategy<String> {
    let mut items: Vec<String> = [
        "Class",
        "ObjectProperty",
        "DatatypeProperty",
        "AnnotationProperty",
        "NamedIndividual",
        "TransitiveProperty",
        "FunctionalProperty",
        "SymmetricProperty",
        "Thing",
        "AllDisjointClasses",
        "Ontology",
    ]
    .into_iter()
    .map(|l| format!("{OWL}{l}"))
    .collect();
    items.push(format!("{RDFS}Class"));
    items.extend((0..8).map(|i| ex(&format!("C{i}"))));
    pick(items)
}

pub fn literal() -> BoxedStrategy<Literal> {
    let lexical = "[a-zA-Z0-9 .,'\"\\\\\n\t\u{e9}\u{4e2d}-]{0,12}";
    prop_oneof![
        lexical.prop_map(Literal::plain),
        (lexical, proptest::sample::select(vec!["en", "de-CH", "fr"]))
            .prop_map(|(l, t)| Literal::lang(l, t)),
        (0i64..1000).prop_map(|n| Literal::typed(n.to_string(), format!("{XSD}integer"))),
        (
            lexical,
            proptest::sample::select(vec![format!("{XSD}string"), ex("Unit")])
        )
            .prop_map(|(l, d)| Literal::typed(l, d)),
    ]
    .boxed()
}

fn blank() -> BoxedStrategy<String> {
    (0..4u8).prop_map(|i| format!("b{i}")).boxed()
}

fn subject(blanks: bool) -> BoxedStrategy<Term> {
    if blanks {
        prop_oneof![3 => entity().prop_map(Term::Iri), 1 => blank().prop_map(Term::Blank)].boxed()
    } else {
        entity().prop_map(Term::Iri).boxed()
    }
}

fn object(blanks: bool) -> BoxedStrategy<Term> {
    let mut options = vec![
        (3, entity().prop_map(Term::Iri).boxed()),
        (2, literal().prop_map(Term::Literal).boxed()),
    ];
    if blanks {
        options.push((1, blank().prop_map(Term::Blank).boxed()));
    }
    proptest::strategy::Union::new_weighted(options).boxed()
}

pub fn triple(blanks: bool) -> BoxedStrategy<Triple> {
    prop_oneof![
        2 => (subject(blanks), type_object()).prop_map(|(s, o)| Triple {
            subject: s,
            predicate: Term::Iri(format!("{RDF}type")),
            object: Term::Iri(o),
        }),
        3 => (subject(blanks), predicate(), object(blanks)).prop_map(|(s, p, o)| Triple {
            subject: s,
            predicate: Term::Iri(p),
            object: o,
        }),
    ]
    .boxed()
}

pub fn prefixes() -> PrefixMap {
    let mut map = PrefixMap::standard();
    map.bind("", EX).unwrap();
    map
}

pub fn graph_from(triples: Vec<Triple>) -> OntologyGraph {
    let mut g = OntologyGraph::with_prefixes(prefixes());
    for t in triples {
        g.insert(t).unwrap();
    }
    g
}

pub fn graph(max_triples: usize, blanks: bool) -> BoxedStrategy<OntologyGraph> {
    proptest::collection::vec(triple(blanks), 0..=max_triples)
        .prop_map(graph_from)
        .boxed()
}

/// `n` values from `strategy`, drawn with a fixed seed.
pub fn sample<T: std::fmt::Debug>(strategy: BoxedStrategy<T>, n: usize) -> Vec<T> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}
