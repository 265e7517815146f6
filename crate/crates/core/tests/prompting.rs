mod common;

use common::fixture_dir;
use ontogen::prompt::{
    aggregate_fragment, format_conceptual_model, parse_conceptual_model, parse_extraction_response,
    plan_categories, ConceptualTriple, DomainProfile, ErrorContext, PipelineState, PlanError,
    PromptError, StageId, TemplateSet,
};
use proptest::prelude::*;

fn profile() -> DomainProfile {
    DomainProfile::load(&fixture_dir("e2e").join("profile.toml")).unwrap()
}

/// State positioned just before `stage`.
fn state_before(stage: StageId) -> PipelineState {
    let mut state = PipelineState::new(profile());
    state.stage = if stage.is_correction() {
        Some(StageId::HierarchyRefinement)
    } else {
        StageId::from_number(stage.number() - 1)
    };
    state
}

fn render(stage: StageId) -> String {
    let context = ErrorContext {
        error_message: "CYCLE: circular subclass axioms".into(),
        affected_fragment: ":A rdfs:subClassOf :B .".into(),
    };
    let extra = stage.is_correction().then_some(&context);
    TemplateSet::bundled()
        .render(stage, &state_before(stage), extra)
        .unwrap()
}

#[test]
fn anchors_are_present_where_required() {
    for stage in StageId::ALL {
        let text = render(stage);
        let n = stage.number();
        if n == 1 || (3..=13).contains(&n) {
            assert!(
                text.contains("subclass count should at least be n-1"),
                "{stage}"
            );
        }
        if (7..=16).contains(&n) {
            assert!(text.contains("Print only the new triples"), "{stage}");
        }
        if (6..=13).contains(&n) {
            assert!(
                text.contains("circular axioms, missing disjointness"),
                "{stage}"
            );
        }
    }
}

#[test]
fn rendering_fills_every_placeholder_and_is_deterministic() {
    for stage in StageId::ALL {
        let text = render(stage);
        assert!(!text.contains("{{"), "{stage} left a placeholder");
        assert_eq!(text, render(stage));
    }
    let profile = profile();
    assert!(TemplateSet::bundled()
        .render_categorize(&profile)
        .unwrap()
        .contains("Aquifer"));
}

#[test]
fn profile_content_reaches_the_prompts() {
    let p1 = render(StageId::Requirements);
    assert!(p1.contains("groundwater ecologist"));
    assert!(p1.contains("class_count=40"));
    let p4 = render(StageId::Extraction);
    assert!(p4.contains("\"cq1\": \"Which measurement does an observation report?\""));
    assert!(p4.contains("Entity: [\"Observation\", \"Measurement\"]"));
    assert!(render(StageId::Reuse).contains("-->confined aquifer"));
}

#[test]
fn correction_prompts_need_error_context() {
    let state = state_before(StageId::FixPitfall);
    let err = TemplateSet::bundled()
        .render(StageId::FixPitfall, &state, None)
        .unwrap_err();
    assert!(matches!(err, PromptError::MissingPlaceholder(name) if name == "error_message"));
}

#[test]
fn stages_run_in_order() {
    let state = state_before(StageId::ConceptualModel);
    let err = TemplateSet::bundled()
        .render(StageId::Extraction, &state, None)
        .unwrap_err();
    assert!(matches!(err, PromptError::StageOrder { .. }));
    let fresh = PipelineState::new(profile());
    assert!(TemplateSet::bundled()
        .render(StageId::FixSyntax, &fresh, None)
        .is_err());
}

#[test]
fn template_directory_overrides_single_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p01_requirements.txt"),
        "Domain: {{domain_name}}",
    )
    .unwrap();
    let set = TemplateSet::from_dir(dir.path()).unwrap();
    let state = state_before(StageId::Requirements);
    assert_eq!(
        set.render(StageId::Requirements, &state, None).unwrap(),
        "Domain: Groundwater Ecology"
    );
    assert_eq!(
        set.stage(StageId::Reuse),
        TemplateSet::bundled().stage(StageId::Reuse)
    );
}

#[test]
fn extraction_reply_with_bad_block() {
    let parsed = parse_extraction_response(
        "\"cq1\": \"Q?\"\nEntity: [\"A\", \"B\"]\nProperty: [\"p\"]\n\n\"cq2\": \"R?\"\nEntity: [\"C\"]\n",
    );
    assert_eq!(parsed.records.len(), 1);
    assert_eq!(parsed.skipped, 1);
    assert_eq!(parsed.success_ratio(), 0.5);
}

#[test]
fn plan_at_scale() {
    let keywords: Vec<String> = (0..222).map(|i| format!("Keyword {i:03}")).collect();
    let response: String = (0..22)
        .map(|c| {
            let members: Vec<&str> = keywords
                .iter()
                .skip(c)
                .step_by(22)
                .map(String::as_str)
                .collect();
            format!("Category {}: {}\n", c + 1, members.join(", "))
        })
        .collect();
    let plan = plan_categories(&keywords, &response).unwrap();
    assert_eq!(plan.len(), 22);
    assert!(plan.values().all(|kws| !kws.is_empty()));
    assert_eq!(plan.values().map(Vec::len).sum::<usize>(), 222);
}

#[test]
fn plan_errors() {
    let keywords: Vec<String> = ["Aquifer", "Sediment", "Biofilm", "Bacterium"]
        .map(String::from)
        .to_vec();
    let ok = plan_categories(
        &keywords,
        "Habitats: aquifer, Sediment\nOrganisms: Biofilm, Bacterium",
    )
    .unwrap();
    assert_eq!(ok["Habitats"], vec!["Aquifer", "Sediment"]);
    assert_eq!(
        plan_categories(&keywords, "Habitats: Aquifer, Sediment\nOrganisms: Biofilm"),
        Err(PlanError::UnassignedKeywords(vec!["Bacterium".into()]))
    );
    assert!(matches!(
        plan_categories(
            &keywords,
            "Habitats: Aquifer, Sediment, Lake\nOrganisms: Biofilm, Bacterium"
        ),
        Err(PlanError::UnknownKeywords(_))
    ));
    assert!(matches!(
        plan_categories(
            &keywords,
            "Habitats: Aquifer, Sediment, Biofilm, Bacterium\nEmpty:"
        ),
        Err(PlanError::EmptyCategory(_))
    ));
}

fn name() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9 _]{0,12}[A-Za-z0-9]"
}

fn fragment(classes: Vec<(u8, u8)>) -> String {
    let mut text = String::from(
        "@prefix : <http://example.org/ontology#> .\n@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n",
    );
    for (a, b) in classes {
        text.push_str(&format!(
            ":C{a} rdfs:subClassOf :C{b} .\n:C{a} rdfs:subClassOf [ rdfs:label \"r{b}\" ] .\n"
        ));
    }
    text
}

fn implemented_state() -> PipelineState {
    let mut state = PipelineState::new(profile());
    state.stage = Some(StageId::ImplementTurtle);
    state
}

proptest! {
    #[test]
    fn conceptual_model_round_trips(triples in proptest::collection::vec((name(), name(), name()), 0..10)) {
        let triples: Vec<ConceptualTriple> = triples
            .into_iter()
            .map(|(subject, relation, object)| ConceptualTriple { subject, relation, object })
            .collect();
        prop_assert_eq!(parse_conceptual_model(&format_conceptual_model(&triples)), triples);
    }

    #[test]
    fn aggregation_is_order_independent(
        fragments in proptest::collection::vec(proptest::collection::vec((0u8..6, 0u8..6), 0..5), 1..5),
    ) {
        let texts: Vec<String> = fragments.into_iter().map(fragment).collect();
        let fold = |order: &mut dyn Iterator<Item = &String>| {
            order.fold(implemented_state(), |state, text| aggregate_fragment(&state, text).unwrap())
        };
        let forward = fold(&mut texts.iter());
        let backward = fold(&mut texts.iter().rev());
        prop_assert!(forward.working_graph.is_isomorphic(&backward.working_graph));
        let again = aggregate_fragment(&forward, &texts[0]).unwrap();
        prop_assert_eq!(again.working_graph.len(), forward.working_graph.len());
    }
}
