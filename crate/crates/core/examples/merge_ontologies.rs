//! Merge two ontologies; the foundation keeps its labels.

use ontogen::fuse::{merge, MergePolicy};
use ontogen::{parse_turtle, serialize};

const FOUNDATION: &str = r#"
@prefix : <http://example.org/water#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
:Aquifer a owl:Class ; rdfs:label "aquifer" .
"#;

const ADDITION: &str = r#"
@prefix : <http://example.org/water#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
:Aquifer rdfs:label "groundwater reservoir" ; rdfs:subClassOf :Habitat .
:Habitat a owl:Class .
"#;

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let foundation = parse_turtle(FOUNDATION)?;
    let addition = parse_turtle(ADDITION)?;
    let merged = merge(&foundation, &[addition], &MergePolicy::default())?;
    Ok(serialize(&merged))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
