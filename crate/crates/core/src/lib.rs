//! Ontology generation through a staged prompt pipeline.

pub mod align;
pub mod fuse;
pub mod gateway;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod prompt;
pub mod turtle;
pub mod verify;
pub mod vocab;

pub use model::{
    Literal, LiteralKind, ModelError, OntologyGraph, OntologyMetrics, PrefixMap, Term, Triple,
};
pub use turtle::{extract_fragment, parse_turtle, serialize, SyntaxIssue};
