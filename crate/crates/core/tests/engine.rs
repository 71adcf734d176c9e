use std::collections::BTreeMap;

use bipforge_core::dsl::{load_pattern, EventSchedule};
use bipforge_core::engine::{glue_interactions, run, GlueSource, Policy, RunConfig, Terminal, Trace};
use bipforge_core::CardinalityAssignment;
use proptest::prelude::*;

fn mutex_trace(n: u32, seed: u64, cycles: u64, policy: Policy, glue: GlueSource) -> Trace {
    let params = BTreeMap::from([("n".to_string(), n)]);
    let m = load_pattern("mutex", &params).unwrap();
    let cards = CardinalityAssignment::resolve(&m, &BTreeMap::new(), &params).unwrap();
    run(&m, &cards, RunConfig { seed, max_cycles: cycles, policy, glue }, &EventSchedule::default()).unwrap()
}

fn check_invariants(trace: &Trace, n: u32, glue: GlueSource) {
    let params = BTreeMap::from([("n".to_string(), n)]);
    let m = load_pattern("mutex", &params).unwrap();
    let cards = CardinalityAssignment::resolve(&m, &BTreeMap::new(), &params).unwrap();
    let interactions = glue_interactions(&m, &cards, glue).unwrap();
    let mut pre = BTreeMap::new();
    for i in cards.instances() {
        let initial = if i.component == "Process" { "sleeping" } else { "free" };
        pre.insert(i, initial.to_string());
    }
    for rec in &trace.records {
        let working = rec.states.iter().filter(|(i, s)| i.component == "Process" && *s == "working").count();
        assert!(working <= 1, "cycle {}", rec.cycle);
        if let Some(a) = &rec.interaction {
            assert!(interactions.contains(a));
            assert!(a.is_subset(&rec.enabled));
        }
        for f in &rec.fired {
            assert_eq!(pre[&f.port.instance()], f.from);
            assert_eq!(rec.states[&f.port.instance()], f.to);
        }
        pre = rec.states.clone();
    }
}

#[test]
fn mutex_runs_forever_and_stays_exclusive() {
    for glue in [GlueSource::Diagram, GlueSource::Macros] {
        for n in 2..=4 {
            let t = mutex_trace(n, 42, 500, Policy::Uniform, glue);
            assert_eq!(t.terminal, Terminal::Completed);
            assert_eq!(t.records.len(), 500);
            check_invariants(&t, n, glue);
        }
    }
}

#[test]
fn first_policy_alternates_process_one() {
    let t = mutex_trace(3, 0, 4, Policy::First, GlueSource::Diagram);
    let chosen: Vec<String> = t.records.iter().map(|r| r.interaction.as_ref().unwrap().to_string()).collect();
    assert_eq!(
        chosen,
        [
            "MutexManager[1].acquire Process[1].acquire",
            "MutexManager[1].release Process[1].release",
            "MutexManager[1].acquire Process[1].acquire",
            "MutexManager[1].release Process[1].release",
        ]
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn traces_are_deterministic(seed in any::<u64>(), n in 2u32..5) {
        let a = mutex_trace(n, seed, 100, Policy::Uniform, GlueSource::Diagram);
        let b = mutex_trace(n, seed, 100, Policy::Uniform, GlueSource::Diagram);
        prop_assert_eq!(a.to_json(), b.to_json());
        check_invariants(&a, n, GlueSource::Diagram);
    }
}
