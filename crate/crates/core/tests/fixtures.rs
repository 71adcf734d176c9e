use std::collections::BTreeMap;
use std::path::Path;

use bipforge_core::behavior::check_behavior;
use bipforge_core::diagram::{
    check_encodable, conforms, enumerate_configurations, expand_unique, Architecture, EnumerateOptions,
};
use bipforge_core::dsl::parse_model;
use bipforge_core::interaction::interactions_of_configuration;
use bipforge_core::macros::{check_equivalence, encode_macros, interactions_from_macros, MacroMode};
use bipforge_core::pil::DEFAULT_UNIVERSE_BOUND;
use bipforge_core::{render_interactions, CardinalityAssignment, Model};

fn fixture(name: &str) -> (Model, CardinalityAssignment) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name);
    let m = parse_model(&std::fs::read_to_string(&path).unwrap(), name).unwrap();
    let cards = CardinalityAssignment::resolve(&m, &BTreeMap::new(), &BTreeMap::new()).unwrap();
    (m, cards)
}

#[test]
fn trigger_pair_interactions() {
    let (m, cards) = fixture("trigger_pair.bip");
    let set = interactions_of_configuration(&expand_unique(&m, &cards).unwrap());
    assert_eq!(
        render_interactions(&set),
        "T1[1].p T2[1].q\nT1[1].p T2[1].q T2[2].q\nT1[1].p T2[2].q\nT2[1].q\nT2[1].q T2[2].q\nT2[2].q\n"
    );
}

#[test]
fn matching_has_two_architectures() {
    let (m, cards) = fixture("matching.bip");
    let report = check_encodable(&m, &cards);
    assert!(!report.verdict);
    assert_eq!(report.diagnostics.len(), 2);
    let configs = enumerate_configurations(&m, &cards, EnumerateOptions::default()).unwrap();
    let texts: Vec<String> = configs.iter().map(|c| c.to_string()).collect();
    assert_eq!(
        texts,
        ["g: T1[1].p* T2[1].q*\ng: T1[2].p* T2[2].q*\n", "g: T1[1].p* T2[2].q*\ng: T1[2].p* T2[1].q*\n",]
    );
    for c in configs {
        assert!(conforms(&Architecture::with_instances(&cards, c), &m, &cards));
    }
}

#[test]
fn bipartite_is_unique() {
    let (m, cards) = fixture("bipartite.bip");
    assert!(check_encodable(&m, &cards).verdict);
    let unique = expand_unique(&m, &cards).unwrap();
    assert_eq!(unique.len(), 4);
    assert_eq!(enumerate_configurations(&m, &cards, EnumerateOptions::default()).unwrap(), vec![unique]);
    assert!(check_equivalence(&m, &cards, DEFAULT_UNIVERSE_BOUND).unwrap().equal);
}

#[test]
fn star_macros_match_diagram() {
    let (m, cards) = fixture("star.bip");
    let from_macros =
        interactions_from_macros(&encode_macros(&m), &cards, DEFAULT_UNIVERSE_BOUND, MacroMode::Scoped).unwrap();
    assert_eq!(render_interactions(&from_macros), "C[1].p S[1].q\nC[1].p S[2].q\nC[1].p S[3].q\n");
}

#[test]
fn macro_encoding_ignores_cardinalities() {
    let (m, _) = fixture("star.bip");
    let text = parse_model(
        &std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("models/star.bip"))
            .unwrap()
            .replace("(n=3)", "(n=7)"),
        "s",
    )
    .unwrap();
    assert_eq!(encode_macros(&m), encode_macros(&text));
}

#[test]
fn route_reports_broken_lts_messages() {
    let (m, _) = fixture("route.bip");
    let diags = check_behavior(&m);
    let lines: Vec<String> = diags.iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    assert_eq!(
        lines,
        [
            "ERROR NO_INITIAL route.bip:3:11 Component type [Route] does not have an initial state. Please define an initial state.",
            "ERROR DANGLING_DEST route.bip:8:3 Transition [finished] with no destination encountered. Please connect or remove it.",
            "ERROR DANGLING_SRC route.bip:9:3 Transition [on] with no source encountered. Please connect or remove it.",
        ]
    );
}
