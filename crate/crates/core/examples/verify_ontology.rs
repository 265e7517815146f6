//! Look for consistency problems and common pitfalls.

use ontogen::parse_turtle;
use ontogen::verify::{verify_graph, PitfallConfig};

const SOURCE: &str = r#"
@prefix : <http://example.org/water#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

:Lake a owl:Class ; rdfs:label "lake" ; rdfs:subClassOf :Pond .
:Pond a owl:Class ; rdfs:label "pond" ; rdfs:subClassOf :Lake .
:River a owl:Class ; owl:disjointWith :Lake .
:Danube a :River , :Lake .
"#;

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let graph = parse_turtle(SOURCE)?;
    let report = verify_graph(&graph, &PitfallConfig::default());
    Ok(report.to_report())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
