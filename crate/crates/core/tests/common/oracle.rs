//! A deliberately naive metric counter: one linear scan per metric over
//! plain string tuples, sharing no code with the library's metric module.

use std::collections::HashSet;

use ontogen::{OntologyGraph, OntologyMetrics, Term};

const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

const STANDARD_NAMESPACES: [&str; 7] = [
    "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "http://www.w3.org/2000/01/rdf-schema#",
    "http://www.w3.org/2002/07/owl#",
    "http://www.w3.org/2001/XMLSchema#",
    "http://purl.org/dc/elements/1.1/",
    "http://purl.org/dc/terms/",
    "http://www.w3.org/2004/02/skos/core#",
];

fn standard(iri: &str) -> bool {
    STANDARD_NAMESPACES.iter().any(|ns| iri.starts_with(ns))
}

fn owl(local: &str) -> String {
    format!("http://www.w3.org/2002/07/owl#{local}")
}

/// (subject IRI, predicate, object IRI); blank nodes and literals become None.
fn tuples(graph: &OntologyGraph) -> Vec<(Option<String>, String, Option<String>)> {
    let iri = |t: &Term| match t {
        Term::Iri(s) => Some(s.clone()),
        _ => None,
    };
    graph
        .iter()
        .map(|t| (iri(&t.subject), iri(&t.predicate).unwrap(), iri(&t.object)))
        .collect()
}

pub fn naive_metrics(graph: &OntologyGraph) -> OntologyMetrics {
    let rows = tuples(graph);
    let typed = |accept: &dyn Fn(&str) -> bool| -> usize {
        let mut found = HashSet::new();
        for (s, p, o) in &rows {
            if let (Some(s), true, Some(o)) = (s, p == TYPE, o) {
                if !standard(s) && accept(o) {
                    found.insert(s.clone());
                }
            }
        }
        found.len()
    };
    let count = |pred: &str| rows.iter().filter(|(_, p, _)| p == pred).count();

    let logical_predicates = [
        SUBCLASS.to_string(),
        owl("equivalentClass"),
        owl("disjointWith"),
        "http://www.w3.org/2000/01/rdf-schema#domain".to_string(),
        "http://www.w3.org/2000/01/rdf-schema#range".to_string(),
        owl("inverseOf"),
    ];
    let characteristic = [
        "FunctionalProperty",
        "InverseFunctionalProperty",
        "TransitiveProperty",
        "SymmetricProperty",
        "AsymmetricProperty",
        "ReflexiveProperty",
        "IrreflexiveProperty",
    ];
    let logical_type = |o: &str| {
        o == owl("Class")
            || o == "http://www.w3.org/2000/01/rdf-schema#Class"
            || o == owl("AllDisjointClasses")
            || characteristic.iter().any(|c| o == owl(c))
            || !standard(o)
    };
    let logical = rows
        .iter()
        .filter(|(_, p, o)| {
            logical_predicates.contains(p) || (p == TYPE && o.as_deref().is_some_and(logical_type))
        })
        .count();

    let mut classes = HashSet::new();
    for (s, p, o) in &rows {
        let mut add = |x: &Option<String>| {
            if let Some(x) = x {
                if !standard(x) {
                    classes.insert(x.clone());
                }
            }
        };
        if p == TYPE {
            match o.as_deref() {
                Some(o)
                    if o == owl("Class") || o == "http://www.w3.org/2000/01/rdf-schema#Class" =>
                {
                    add(s)
                }
                Some(o) if !standard(o) => add(&Some(o.to_string())),
                _ => {}
            }
        }
        if p == SUBCLASS {
            add(s);
            add(o);
        }
    }

    let all_disjoint = rows
        .iter()
        .filter(|(_, p, o)| p == TYPE && o.as_deref() == Some(owl("AllDisjointClasses").as_str()))
        .count();
    OntologyMetrics {
        axiom_count: rows.len() as u64,
        logical_axiom_count: logical as u64,
        class_count: classes.len() as u64,
        subclass_of_count: count(SUBCLASS) as u64,
        equivalent_classes_count: count(&owl("equivalentClass")) as u64,
        disjoint_classes_count: (count(&owl("disjointWith")) + all_disjoint) as u64,
        object_property_count: typed(&|o| {
            o == owl("ObjectProperty") || characteristic[1..].iter().any(|c| o == owl(c))
        }) as u64,
        data_property_count: typed(&|o| o == owl("DatatypeProperty")) as u64,
        annotation_property_count: typed(&|o| o == owl("AnnotationProperty")) as u64,
        individual_count: typed(&|o| o == owl("NamedIndividual") || !standard(o)) as u64,
    }
}
