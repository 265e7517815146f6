//! Exit-gate checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::corpus::corpus;
use common::oracle::naive_metrics;
use common::{fixture_dir, gen, generated_before_corrections, replay_config};
use ontogen::align::align;
use ontogen::fuse::{merge, MergePolicy};
use ontogen::metrics::{compute_metrics, gap_report};
use ontogen::pipeline::{generate, Runtime, FINAL_ONTOLOGY, GENERATION_SESSION};
use ontogen::prompt::{DomainProfile, ErrorContext, PipelineState, StageId, TemplateSet};
use ontogen::verify::{verify_graph, PitfallConfig, RoundOutcome};
use ontogen::{parse_turtle, serialize, OntologyGraph, OntologyMetrics, Term, Triple};

type Check = Result<String, String>;

/// Identifier, short name and check function of one criterion.
type Criterion = (&'static str, &'static str, fn() -> Check);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn metrics_oracle() -> Check {
    let start = Instant::now();
    let random = gen::sample(gen::graph(200, true), 25);
    let hand_built: Vec<OntologyGraph> = corpus()
        .iter()
        .map(|case| parse_turtle(&case.turtle).map_err(|e| format!("{}: {e}", case.name)))
        .collect::<Result<_, _>>()?;
    for (i, g) in random.iter().chain(&hand_built).enumerate() {
        let (fast, naive) = (compute_metrics(g), naive_metrics(g));
        ensure(fast == naive, || {
            format!("graph {i}: {fast:?} != {naive:?}")
        })?;
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!(
        "{} random and {} hand-built graphs agree",
        random.len(),
        hand_built.len()
    ))
}

fn gap_arithmetic() -> Check {
    let actual = OntologyMetrics {
        class_count: 176,
        subclass_of_count: 6,
        ..Default::default()
    };
    let target = OntologyMetrics {
        class_count: 8892,
        ..Default::default()
    };
    let report = gap_report(&actual, &target);
    ensure(report.deficit("class_count") == Some(8716), || {
        format!("class deficit {:?}", report.deficit("class_count"))
    })?;
    ensure(report.subclass_rule_deficit == 169, || {
        format!("subclass-rule deficit {}", report.subclass_rule_deficit)
    })?;
    Ok("class deficit 8716, subclass-rule deficit 169".into())
}

fn round_trip() -> Check {
    let graphs = gen::sample(gen::graph(60, true), 50);
    for (i, g) in graphs.iter().enumerate() {
        let text = serialize(g);
        let back = parse_turtle(&text).map_err(|e| format!("graph {i}: {e}\n{text}"))?;
        ensure(back.is_isomorphic(g), || {
            format!("graph {i} changed on round-trip")
        })?;
        ensure(serialize(&back) == text, || {
            format!("graph {i} serialized differently")
        })?;
    }
    Ok(format!("{} graphs round-trip", graphs.len()))
}

fn pitfall_soundness() -> Check {
    let start = Instant::now();
    let cases = corpus();
    let config = PitfallConfig::default();
    for case in &cases {
        let graph = parse_turtle(&case.turtle).map_err(|e| format!("{}: {e}", case.name))?;
        let report = verify_graph(&graph, &config);
        let codes: Vec<&str> = report.findings.iter().map(|f| f.code.as_str()).collect();
        match case.expected {
            Some(code) => ensure(
                !codes.is_empty() && codes.iter().all(|c| *c == code),
                || format!("{}: expected {code}, got {codes:?}", case.name),
            )?,
            None => ensure(report.clean, || {
                format!("{}: expected clean, got {codes:?}", case.name)
            })?,
        }
    }
    within(start, Duration::from_secs(2))?;
    Ok(format!(
        "{} corpus ontologies classified exactly",
        cases.len()
    ))
}

fn annotation_key(t: &Triple) -> Option<(String, String)> {
    let p = t.predicate_iri();
    let annotation = [
        format!("{}label", gen::RDFS),
        format!("{}comment", gen::RDFS),
    ];
    (annotation.iter().any(|a| a == p) && t.object.is_literal()).then(|| {
        (
            t.subject.as_iri().unwrap_or_default().to_string(),
            p.to_string(),
        )
    })
}

fn merge_algebra() -> Check {
    let policy = MergePolicy::default();
    let pairs = gen::sample(gen::graph(30, false), 120);
    let mut cases = 0;
    for pair in pairs.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let merged = merge(a, std::slice::from_ref(b), &policy).map_err(|e| e.to_string())?;
        let taken: HashSet<_> = a.iter().filter_map(annotation_key).collect();
        let expected: HashSet<&Triple> = a
            .iter()
            .chain(
                b.iter()
                    .filter(|t| annotation_key(t).is_none_or(|k| !taken.contains(&k))),
            )
            .collect();
        ensure(merged.iter().collect::<HashSet<_>>() == expected, || {
            format!("case {cases}: merge differs from the precedence union")
        })?;
        ensure(merged.len() <= a.len() + b.len(), || {
            format!("case {cases}: union too large")
        })?;
        let again =
            merge(&merged, std::slice::from_ref(&merged), &policy).map_err(|e| e.to_string())?;
        ensure(again == merged, || format!("case {cases}: not idempotent"))?;
        let alone = merge(a, &[OntologyGraph::new()], &policy).map_err(|e| e.to_string())?;
        ensure(alone == *a, || {
            format!("case {cases}: empty addition changed the foundation")
        })?;
        cases += 1;
    }
    Ok(format!("{cases} randomized pairs"))
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

fn alignment() -> Check {
    let gold_names: Vec<String> = (0..20)
        .map(|i| format!("water body type {}", (b'a' + i) as char))
        .collect();
    let generated_names: Vec<String> = gold_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            format!(
                "{}{}",
                &name[..name.len() - i % 4],
                "xyz".get(..i % 4).unwrap_or("")
            )
        })
        .collect();
    let gold = class_graph("G", &gold_names);
    let generated = class_graph("X", &generated_names);
    let thresholds = [0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0];
    let mut previous: Option<HashSet<(String, String)>> = None;
    for &t in &thresholds {
        let result = align(&generated, &gold, t);
        let pairs: HashSet<(String, String)> = result
            .pairs
            .iter()
            .map(|p| (p.generated.clone(), p.gold.clone()))
            .collect();
        if let Some(prev) = &previous {
            ensure(pairs.is_subset(prev), || {
                format!("threshold {t} added pairs")
            })?;
        }
        let mean = if result.pairs.is_empty() {
            0.0
        } else {
            result.pairs.iter().map(|p| p.score).sum::<f64>() / result.pairs.len() as f64
        };
        ensure((mean - result.average_score).abs() <= 1e-12, || {
            format!(
                "threshold {t}: average {} vs mean {mean}",
                result.average_score
            )
        })?;
        ensure(result.matched_count == result.pairs.len(), || {
            "matched_count mismatch".into()
        })?;
        previous = Some(pairs);
    }
    let pair = align(
        &class_graph("X", &["interact with".into()]),
        &class_graph("G", &["interacts with".into()]),
        0.9,
    );
    let score = pair.pairs.first().map(|p| p.score);
    ensure(score == Some(1.0 - 1.0 / 14.0), || {
        format!("interact pair scored {score:?}")
    })?;
    Ok("monotone over 7 thresholds, exact means, 1 - 1/14".into())
}

fn end_to_end_replay() -> Check {
    let start = Instant::now();
    let mut finals = Vec::new();
    for _ in 0..3 {
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        let summary = generate(&replay_config("e2e", out.path()), &Runtime::default())
            .map_err(|e| e.to_string())?;
        let text =
            std::fs::read_to_string(out.path().join(FINAL_ONTOLOGY)).map_err(|e| e.to_string())?;
        let graph = parse_turtle(&text).map_err(|e| e.to_string())?;
        let m = compute_metrics(&graph);
        ensure(m.class_count >= 10, || {
            format!("class_count {}", m.class_count)
        })?;
        ensure(m.subclass_of_count + 1 >= m.class_count, || {
            format!(
                "subclass_of_count {} for {} classes",
                m.subclass_of_count, m.class_count
            )
        })?;
        ensure(summary.report.clean, || summary.report.to_report())?;
        let reports: Vec<String> = ["metrics.txt", "gaps.txt", "verification.txt"]
            .iter()
            .map(|name| std::fs::read_to_string(out.path().join(name)).unwrap_or_default())
            .collect();
        finals.push((text, reports));
    }
    ensure(finals.windows(2).all(|w| w[0] == w[1]), || {
        "repetitions differ".into()
    })?;
    within(start, Duration::from_secs(10))?;
    let m = compute_metrics(&parse_turtle(&finals[0].0).map_err(|e| e.to_string())?);
    Ok(format!(
        "3 identical runs, {} classes, {} subClassOf, clean",
        m.class_count, m.subclass_of_count
    ))
}

fn correction_guard() -> Check {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let summary = generate(&replay_config("occam", out.path()), &Runtime::default())
        .map_err(|e| e.to_string())?;
    let round = summary.rounds.first().ok_or("no correction round ran")?;
    let reason = round
        .retried_after
        .as_deref()
        .ok_or("the class-deleting reply was accepted")?;
    ensure(reason.contains("class count"), || {
        format!("rejected for another reason: {reason}")
    })?;
    ensure(round.outcome == RoundOutcome::Accepted, || {
        format!("retry outcome {:?}", round.outcome)
    })?;
    let before = compute_metrics(&generated_before_corrections(
        &fixture_dir("occam")
            .join("transcripts")
            .join(GENERATION_SESSION),
    ));
    let counts = [before.class_count, summary.metrics.class_count];
    ensure(counts[0] <= counts[1], || {
        format!("class count fell from {} to {}", counts[0], counts[1])
    })?;
    Ok(format!(
        "deleting reply rejected, classes {} before and {} after correction",
        counts[0], counts[1]
    ))
}

fn template_fidelity() -> Check {
    let profile =
        DomainProfile::load(&fixture_dir("e2e").join("profile.toml")).map_err(|e| e.to_string())?;
    let templates = TemplateSet::bundled();
    let context = ErrorContext {
        error_message: "CYCLE: circular subclass axioms".into(),
        affected_fragment: ":A rdfs:subClassOf :B .".into(),
    };
    for stage in StageId::ALL {
        let mut state = PipelineState::new(profile.clone());
        state.stage = if stage.is_correction() {
            Some(StageId::HierarchyRefinement)
        } else {
            StageId::from_number(stage.number() - 1)
        };
        let text = templates
            .render(stage, &state, stage.is_correction().then_some(&context))
            .map_err(|e| format!("{stage}: {e}"))?;
        let n = stage.number();
        let mut anchors = Vec::new();
        if n == 1 {
            anchors.push("subclass count should at least be n-1");
        }
        if (7..=13).contains(&n) {
            anchors.push("Print only the new triples");
        }
        if (6..=13).contains(&n) {
            anchors.push("circular axioms, missing disjointness");
        }
        for anchor in anchors {
            ensure(text.contains(anchor), || {
                format!("{stage} lacks \"{anchor}\"")
            })?;
        }
    }
    Ok(format!(
        "{} stages rendered with their anchors",
        StageId::ALL.len()
    ))
}

fn main() -> ExitCode {
    let checks: [Criterion; 9] = [
        ("AC1", "metrics oracle equivalence", metrics_oracle),
        ("AC2", "gap arithmetic", gap_arithmetic),
        ("AC3", "turtle round-trip", round_trip),
        (
            "AC4",
            "pitfall and consistency soundness",
            pitfall_soundness,
        ),
        ("AC5", "merge algebra", merge_algebra),
        ("AC6", "alignment determinism and arithmetic", alignment),
        ("AC7", "end-to-end replay", end_to_end_replay),
        ("AC8", "correction-loop guard", correction_guard),
        ("AC9", "template fidelity", template_fidelity),
    ];
    let mut failed = 0;
    for (id, name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {id} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {id} {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
