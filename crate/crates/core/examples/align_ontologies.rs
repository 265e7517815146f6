//! Match the entities of a generated ontology against a reference one by
//! label similarity.

use ontogen::align::align;
use ontogen::parse_turtle;

const GENERATED: &str = r#"
@prefix : <http://example.org/generated#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
:Aquifer a owl:Class .
:GroundWater a owl:Class .
:interactWith a owl:ObjectProperty ; rdfs:label "interact with" .
"#;

const GOLD: &str = r#"
@prefix : <http://example.org/gold#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
:aquifer a owl:Class .
:groundwater a owl:Class .
:interactsWith a owl:ObjectProperty ; rdfs:label "interacts with" .
:Sediment a owl:Class .
"#;

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let result = align(&parse_turtle(GENERATED)?, &parse_turtle(GOLD)?, 0.8);
    Ok(result.to_report())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
