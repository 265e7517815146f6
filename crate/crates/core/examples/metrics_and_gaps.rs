//! Count classes, properties and axioms, then compare against a target.

use ontogen::metrics::{compute_metrics, gap_report, hierarchy_depth};
use ontogen::{parse_turtle, OntologyMetrics};

const SOURCE: &str = r#"
@prefix : <http://example.org/water#> .
@prefix owl: <http://www.w3.org/2002/07/owl#> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .

:WaterBody a owl:Class .
:Lake a owl:Class ; rdfs:subClassOf :WaterBody .
:Pond a owl:Class ; rdfs:subClassOf :Lake .
:River a owl:Class ; rdfs:subClassOf :WaterBody ; owl:disjointWith :Lake .
:flowsInto a owl:ObjectProperty ; rdfs:domain :River ; rdfs:range :WaterBody .
"#;

pub fn run() -> Result<String, Box<dyn std::error::Error>> {
    let graph = parse_turtle(SOURCE)?;
    let metrics = compute_metrics(&graph);
    let target = OntologyMetrics {
        class_count: 10,
        object_property_count: 3,
        ..Default::default()
    };
    let gaps = gap_report(&metrics, &target);
    Ok(format!(
        "{}hierarchy_depth: {}\n{}",
        metrics.to_report(),
        hierarchy_depth(&graph)?,
        gaps.to_report()
    ))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{}", run()?);
    Ok(())
}
