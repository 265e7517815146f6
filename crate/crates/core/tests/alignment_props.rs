mod common;

use common::gen;
use ontogen::align::{align, normalize_label, similarity};
use ontogen::{OntologyGraph, Term, Triple};
use proptest::prelude::*;

const GOLD_NAMES: [&str; 20] = [
    "aquifer",
    "groundwater",
    "sediment",
    "biofilm",
    "bacterium",
    "archaeon",
    "invertebrate",
    "amphipod",
    "copepod",
    "well",
    "borehole",
    "spring",
    "karst",
    "limestone",
    "sandstone",
    "porosity",
    "nitrate",
    "dissolved oxygen",
    "water table",
    "recharge zone",
];

/// Edit distance by the textbook full-matrix recurrence.
fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

fn class_graph(prefix: &str, labels: &[String]) -> OntologyGraph {
    let mut triples = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        let iri = gen::ex(&format!("{prefix}{i:02}"));
        triples.push(
            Triple::iris(
                &iri,
                &format!("{}type", gen::RDF),
                &format!("{}Class", gen::OWL),
            )
            .unwrap(),
        );
        triples.push(Triple {
            subject: Term::Iri(iri),
            predicate: Term::Iri(format!("{}label", gen::RDFS)),
            object: Term::literal(label.clone()),
        });
    }
    gen::graph_from(triples)
}

fn gold() -> OntologyGraph {
    class_graph("G", &GOLD_NAMES.map(String::from))
}

/// Gold names with a few random character edits each.
fn perturbed_names() -> impl Strategy<Value = Vec<String>> {
    let edits = proptest::collection::vec(
        (0usize..3, 0usize..20, proptest::char::range('a', 'z')),
        0..3,
    );
    proptest::collection::vec(edits, 20).prop_map(|per_name| {
        GOLD_NAMES
            .iter()
            .zip(per_name)
            .map(|(name, edits)| {
                let mut chars: Vec<char> = name.chars().collect();
                for (kind, pos, c) in edits {
                    let pos = pos % (chars.len() + 1);
                    match kind {
                        0 => chars.insert(pos, c),
                        1 if pos < chars.len() => {
                            chars.remove(pos);
                        }
                        _ if pos < chars.len() => chars[pos] = c,
                        _ => chars.push(c),
                    }
                }
                chars.into_iter().collect()
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn raising_the_threshold_only_drops_pairs(names in perturbed_names(), t1 in 0.3f64..1.0, t2 in 0.3f64..1.0) {
        let (low, high) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let generated = class_graph("X", &names);
        let loose = align(&generated, &gold(), low);
        let strict = align(&generated, &gold(), high);
        prop_assert!(strict.matched_count <= loose.matched_count);
        let kept: Vec<_> = loose.pairs.iter().filter(|p| p.score >= high).cloned().collect();
        prop_assert_eq!(strict.pairs, kept);
    }

    #[test]
    fn scores_and_average_recompute(names in perturbed_names(), threshold in 0.3f64..1.0) {
        let generated = class_graph("X", &names);
        let result = align(&generated, &gold(), threshold);
        let mut seen_gen = std::collections::HashSet::new();
        let mut seen_gold = std::collections::HashSet::new();
        let mut total = 0.0;
        for pair in &result.pairs {
            prop_assert!(seen_gen.insert(pair.generated.clone()) && seen_gold.insert(pair.gold.clone()));
            let i: usize = pair.generated[pair.generated.len() - 2..].parse().unwrap();
            let j: usize = pair.gold[pair.gold.len() - 2..].parse().unwrap();
            let (a, b) = (normalize_label(&names[i]), normalize_label(GOLD_NAMES[j]));
            let longest = a.chars().count().max(b.chars().count());
            let expected = if longest == 0 { 1.0 } else { 1.0 - edit_distance(&a, &b) as f64 / longest as f64 };
            prop_assert_eq!(pair.score, expected);
            prop_assert!(pair.score >= threshold);
            total += pair.score;
        }
        if !result.pairs.is_empty() {
            prop_assert!((result.average_score - total / result.pairs.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_is_symmetric_and_bounded(a in "[a-z ]{0,15}", b in "[a-z ]{0,15}") {
        let s = similarity(&a, &b);
        prop_assert_eq!(s, similarity(&b, &a));
        prop_assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn identical_ontologies_match_completely() {
    let result = align(&gold(), &gold(), 0.8);
    assert_eq!(result.matched_count, 20);
    assert_eq!(result.average_score, 1.0);
    assert!(result.pairs.iter().all(|p| p.generated == p.gold));
}

#[test]
fn interact_with_scores_one_minus_one_fourteenth() {
    let generated = class_graph("X", &["interact with".to_string()]);
    let gold = class_graph("G", &["interacts with".to_string()]);
    let result = align(&generated, &gold, 0.9);
    assert_eq!(result.pairs[0].score, 1.0 - 1.0 / 14.0);
    assert_eq!(edit_distance("interact with", "interacts with"), 1);
}

#[test]
fn report_format() {
    let generated = class_graph("X", &["aquifer".to_string()]);
    let text = align(&generated, &gold(), 0.8).to_report();
    assert_eq!(
        text,
        format!(
            "matched=1 average=1.000\n{}\t{}\t1.0000\n",
            gen::ex("X00"),
            gen::ex("G00")
        )
    );
}
