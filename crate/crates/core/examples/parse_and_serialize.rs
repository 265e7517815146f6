//! Parse Turtle, inspect the triples and write it back in canonical form.

use ontogen::{parse_turtle, serialize};

const SOURCE: &str = r#"
@prefix : <http://example.org/water#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

:Lake a owl:Class ; rdfs:subClassOf :WaterBody ; rdfs:label "lake"@en .
:WaterBody a owl:Class .
:Lake rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :feeds ; owl:someValuesFrom :River ] .
"#;

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let graph = parse_turtle(SOURCE)?;
    let text = serialize(&graph);
    // The canonical form parses back to the same graph.
    let again = parse_turtle(&text)?;
    assert!(again.is_isomorphic(&graph));
    Ok(format!("{} triples\n{text}", graph.len()))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
