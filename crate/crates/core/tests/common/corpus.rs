//! Seeded verification corpus: for each defect type, one ontology with the
//! defect injected and one near-miss control that must stay clean.

const HEAD: &str = "@prefix : <http://example.org/ontology#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
";

/// A clean base: every class and property annotated, siblings disjoint,
/// properties with domain and range.
const BASE: &str = r#"
:WaterBody a owl:Class ; rdfs:label "water body" ; rdfs:comment "A body of water." .
:Lake a owl:Class ; rdfs:subClassOf :WaterBody ; rdfs:label "lake" ; rdfs:comment "Standing water." .
:River a owl:Class ; rdfs:subClassOf :WaterBody ; rdfs:label "river" ; rdfs:comment "Flowing water." .
:Pond a owl:Class ; rdfs:subClassOf :Lake ; rdfs:label "pond" ; rdfs:comment "A small lake." .
:Organism a owl:Class ; rdfs:label "organism" ; rdfs:comment "A living being." .
:Lake owl:disjointWith :River .
:livesIn a owl:ObjectProperty ; rdfs:domain :Organism ; rdfs:range :WaterBody ;
    rdfs:label "lives in" ; rdfs:comment "Where an organism lives." .
:hasArea a owl:DatatypeProperty ; rdfs:domain :WaterBody ; rdfs:range xsd:decimal ;
    rdfs:label "has area" ; rdfs:comment "Surface area in square metres." .
:Trout1 a owl:NamedIndividual , :Organism ; :livesIn :Lake1 .
:Lake1 a owl:NamedIndividual , :Lake ; :hasArea "12.5"^^xsd:decimal .
"#;

pub struct Case {
    pub name: &'static str,
    pub turtle: String,
    /// Finding code the case must produce; None for a clean control.
    pub expected: Option<&'static str>,
}

fn doc(extra: &str, remove: &[&str]) -> String {
    let mut body = BASE.to_string();
    for r in remove {
        assert!(body.contains(r), "corpus base lacks `{r}`");
        body = body.replacen(r, "", 1);
    }
    format!("{HEAD}{body}{extra}\n")
}

pub fn corpus() -> Vec<Case> {
    let duplicate = r#"
:interactsWith a owl:ObjectProperty ; rdfs:domain :Organism ; rdfs:range :Organism ;
    rdfs:label "interacts with" ; rdfs:comment "Two organisms interact." ."#;
    vec![
        Case {
            name: "cycle injected",
            turtle: doc(":Lake rdfs:subClassOf :Pond .", &[]),
            expected: Some("CYCLE"),
        },
        Case {
            name: "cycle control: deeper chain",
            turtle: doc(
                ":Puddle a owl:Class ; rdfs:subClassOf :Pond ; rdfs:label \"puddle\" ; rdfs:comment \"Tiny.\" .",
                &[],
            ),
            expected: None,
        },
        Case {
            name: "disjointness violation injected",
            turtle: doc(":Lake1 a :River .", &[]),
            expected: Some("DISJOINT_VIOLATION"),
        },
        Case {
            name: "disjointness control: compatible second type",
            turtle: doc(":Lake1 a :WaterBody .", &[]),
            expected: None,
        },
        Case {
            name: "missing disjointness injected",
            turtle: doc("", &[":Lake owl:disjointWith :River ."]),
            expected: Some("MISSING_DISJOINTNESS"),
        },
        Case {
            name: "missing disjointness control: AllDisjointClasses",
            turtle: doc(
                "[] a owl:AllDisjointClasses ; owl:members ( :Lake :River ) .",
                &[":Lake owl:disjointWith :River ."],
            ),
            expected: None,
        },
        Case {
            name: "missing label injected",
            turtle: doc("", &[r#"rdfs:label "river" ;"#]),
            expected: Some("MISSING_LABEL"),
        },
        Case {
            name: "missing label control: language-tagged label",
            turtle: doc(r#":River rdfs:label "river"@en ."#, &[r#"rdfs:label "river" ;"#]),
            expected: None,
        },
        Case {
            name: "duplicate property injected",
            turtle: doc(
                &format!(
                    "{duplicate}\n:interactWith a owl:ObjectProperty ; rdfs:domain :Organism ; rdfs:range :Organism ;\n    rdfs:label \"interact with\" ; rdfs:comment \"Same thing again.\" ."
                ),
                &[],
            ),
            expected: Some("DUPLICATE_PROPERTY"),
        },
        Case {
            name: "duplicate property control: distinct names",
            turtle: doc(
                &format!(
                    "{duplicate}\n:preysOn a owl:ObjectProperty ; rdfs:domain :Organism ; rdfs:range :Organism ;\n    rdfs:label \"preys on\" ; rdfs:comment \"Predation.\" ."
                ),
                &[],
            ),
            expected: None,
        },
        Case {
            name: "missing domain or range injected",
            turtle: doc("", &["rdfs:range xsd:decimal ;"]),
            expected: Some("MISSING_DOMAIN_RANGE"),
        },
        Case {
            name: "missing domain or range control: restated range",
            turtle: doc(":hasArea rdfs:range xsd:double .", &["rdfs:range xsd:decimal ;"]),
            expected: None,
        },
    ]
}
