//! Lexical matching of entities between a generated and a gold ontology.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::metrics::{declared_classes, declared_properties};
use crate::model::{LiteralKind, OntologyGraph, Term};
use crate::vocab;

pub const DEFAULT_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchPair {
    pub generated: String,
    pub gold: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    pub pairs: Vec<MatchPair>,
    pub matched_count: usize,
    pub average_score: f64,
}

impl AlignmentResult {
    fn from_pairs(pairs: Vec<MatchPair>) -> Self {
        let average_score = if pairs.is_empty() {
            0.0
        } else {
            pairs.iter().map(|p| p.score).sum::<f64>() / pairs.len() as f64
        };
        AlignmentResult {
            matched_count: pairs.len(),
            pairs,
            average_score,
        }
    }

    /// `matched=<n> average=<x.xxx>` followed by one tab-separated line per pair.
    pub fn to_report(&self) -> String {
        let mut out = format!(
            "matched={} average={:.3}\n",
            self.matched_count, self.average_score
        );
        for p in &self.pairs {
            out.push_str(&format!("{}\t{}\t{:.4}\n", p.generated, p.gold, p.score));
        }
        out
    }
}

/// Lowercase, split camel case, turn `_` and `-` into spaces and collapse
/// whitespace.
pub fn normalize_label(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut spaced = String::with_capacity(raw.len() + 8);
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '-' {
            spaced.push(' ');
            continue;
        }
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            // "hasMeasurement" and the "L" in "XMLParser" both start a word.
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                spaced.push(' ');
            }
        }
        spaced.extend(c.to_lowercase());
    }
    spaced.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diagonal = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let substitution = diagonal + usize::from(ca != cb);
            diagonal = row[j + 1];
            row[j + 1] = substitution.min(row[j] + 1).min(diagonal + 1);
        }
    }
    row[b.len()]
}

/// `1 - levenshtein / max_len`, and 1.0 for two empty strings.
pub fn similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

/// Local part of an IRI: whatever follows the last `#`, `/` or `:`.
pub fn local_name(iri: &str) -> &str {
    iri.rsplit(['#', '/', ':']).next().unwrap_or(iri)
}

/// Preferred `rdfs:label` (English, then untagged, then any; ties broken by
/// text), falling back to the IRI's local name.
pub fn best_label(graph: &OntologyGraph, iri: &str) -> String {
    let subject = Term::Iri(iri.to_string());
    graph
        .objects(&subject, vocab::RDFS_LABEL)
        .filter_map(Term::as_literal)
        .map(|lit| {
            let rank = match &lit.kind {
                LiteralKind::Lang(tag) if tag == "en" || tag.starts_with("en-") => 0,
                LiteralKind::Plain => 1,
                _ => 2,
            };
            (rank, lit.lexical.clone())
        })
        .min()
        .map(|(_, label)| label)
        .unwrap_or_else(|| local_name(iri).to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntityScope {
    #[default]
    ClassesAndProperties,
    ClassesOnly,
}

/// Declared entities of `graph` with their normalized labels, in IRI order.
/// Entities whose label normalizes to the empty string are skipped.
pub fn labelled_entities(graph: &OntologyGraph, scope: EntityScope) -> BTreeMap<String, String> {
    let mut iris = declared_classes(graph);
    if scope == EntityScope::ClassesAndProperties {
        iris.extend(declared_properties(graph));
    }
    iris.into_iter()
        .filter_map(|iri| {
            let label = normalize_label(&best_label(graph, &iri));
            (!label.is_empty()).then_some((iri, label))
        })
        .collect()
}

pub fn align(generated: &OntologyGraph, gold: &OntologyGraph, threshold: f64) -> AlignmentResult {
    align_with_scope(generated, gold, threshold, EntityScope::default())
}

/// Greedy one-to-one matching: every cross pair scoring at least `threshold`
/// is ranked by descending score, then by (generated IRI, gold IRI), and
/// accepted when neither side is already matched.
pub fn align_with_scope(
    generated: &OntologyGraph,
    gold: &OntologyGraph,
    threshold: f64,
    scope: EntityScope,
) -> AlignmentResult {
    let gen_entities = labelled_entities(generated, scope);
    let gold_entities = labelled_entities(gold, scope);
    let mut candidates = Vec::new();
    for (gen_iri, gen_label) in &gen_entities {
        let gen_len = gen_label.chars().count();
        for (gold_iri, gold_label) in &gold_entities {
            let gold_len = gold_label.chars().count();
            // The length gap alone bounds the similarity from above.
            let longest = gen_len.max(gold_len) as f64;
            if 1.0 - gen_len.abs_diff(gold_len) as f64 / longest < threshold {
                continue;
            }
            let score = similarity(gen_label, gold_label);
            if score >= threshold {
                candidates.push(MatchPair {
                    generated: gen_iri.clone(),
                    gold: gold_iri.clone(),
                    score,
                });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.generated.cmp(&b.generated))
            .then_with(|| a.gold.cmp(&b.gold))
    });
    let mut used_gen = HashSet::new();
    let mut used_gold = HashSet::new();
    let pairs = candidates
        .into_iter()
        .filter(|p| {
            if used_gen.contains(&p.generated) || used_gold.contains(&p.gold) {
                return false;
            }
            used_gen.insert(p.generated.clone());
            used_gold.insert(p.gold.clone());
            true
        })
        .collect();
    AlignmentResult::from_pairs(pairs)
}
