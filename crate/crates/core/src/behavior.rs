//! Well-formedness of each component type's LTS.
//!
//! Diagnostics come out in component declaration order, and within a
//! component: initial-state findings, then per-transition findings in
//! transition order, then unreachable states.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{ComponentType, Diagnostic, Model, TransitionKind};

pub const NO_INITIAL: &str = "NO_INITIAL";
pub const MULTIPLE_INITIAL: &str = "MULTIPLE_INITIAL";
pub const DANGLING_DEST: &str = "DANGLING_DEST";
pub const DANGLING_SRC: &str = "DANGLING_SRC";
pub const UNDECLARED_LABEL: &str = "UNDECLARED_LABEL";
pub const UNREACHABLE_STATE: &str = "UNREACHABLE_STATE";
pub const NONDET_PORT: &str = "NONDET_PORT";

pub fn check_behavior(model: &Model) -> Vec<Diagnostic> {
    model.components.iter().flat_map(check_component).collect()
}

fn check_component(c: &ComponentType) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let name = &c.name.name;
    let path = format!("component[{name}]");
    let states: BTreeSet<&str> = c.lts.states.iter().map(|s| s.name.as_str()).collect();

    let valid_initial: Vec<_> = c.lts.initial.iter().filter(|i| states.contains(i.name.as_str())).collect();
    match valid_initial.len() {
        0 => diags.push(Diagnostic::error(
            NO_INITIAL,
            format!("Component type [{name}] does not have an initial state. Please define an initial state."),
            path.clone(),
            &c.name.span,
        )),
        1 => {}
        _ => diags.push(Diagnostic::error(
            MULTIPLE_INITIAL,
            format!("Component type [{name}] has more than one initial state. Please keep exactly one initial state."),
            path.clone(),
            &valid_initial[1].span,
        )),
    }

    let mut seen_port_exits: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (idx, t) in c.lts.transitions.iter().enumerate() {
        let tname = t.display_name();
        let tpath = format!("{path}/transition[{idx}]");
        if !states.contains(t.source.name.as_str()) {
            diags.push(Diagnostic::error(
                DANGLING_SRC,
                format!("Transition [{tname}] with no source encountered. Please connect or remove it."),
                tpath.clone(),
                &t.span,
            ));
        }
        if !states.contains(t.destination.name.as_str()) {
            diags.push(Diagnostic::error(
                DANGLING_DEST,
                format!("Transition [{tname}] with no destination encountered. Please connect or remove it."),
                tpath.clone(),
                &t.span,
            ));
        }
        match &t.kind {
            TransitionKind::Enforceable(port) => {
                if !c.has_port(&port.name) {
                    diags.push(Diagnostic::error(
                        UNDECLARED_LABEL,
                        format!(
                            "Transition [{tname}] is labelled with undeclared port [{port}]. Please declare the port or relabel it."
                        ),
                        tpath.clone(),
                        &port.span,
                    ));
                }
                let key = (t.source.name.as_str(), port.name.as_str());
                if seen_port_exits.insert(key, idx).is_some() {
                    diags.push(Diagnostic::warning(
                        NONDET_PORT,
                        format!(
                            "Transition [{tname}] leaves state [{}] on the same port as an earlier transition. The first declared one is taken.",
                            t.source
                        ),
                        tpath.clone(),
                        &t.span,
                    ));
                }
            }
            TransitionKind::Spontaneous(event) => {
                if !c.has_event(&event.name) {
                    diags.push(Diagnostic::error(
                        UNDECLARED_LABEL,
                        format!(
                            "Transition [{tname}] is labelled with undeclared event [{event}]. Please declare the event or relabel it."
                        ),
                        tpath.clone(),
                        &event.span,
                    ));
                }
            }
            TransitionKind::Internal => {}
        }
    }

    if let [initial] = valid_initial.as_slice() {
        let reachable = reachable_states(c, &initial.name);
        for s in &c.lts.states {
            if !reachable.contains(s.name.as_str()) {
                diags.push(Diagnostic::warning(
                    UNREACHABLE_STATE,
                    format!("State [{}] of component type [{name}] is not reachable from the initial state.", s.name),
                    format!("{path}/state[{}]", s.name),
                    &s.span,
                ));
            }
        }
    }
    diags
}

fn reachable_states<'a>(c: &'a ComponentType, initial: &'a str) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::from([initial]);
    let mut queue = VecDeque::from([initial]);
    while let Some(s) = queue.pop_front() {
        for t in c.lts.transitions.iter().filter(|t| t.source.name == s) {
            if seen.insert(t.destination.name.as_str()) {
                queue.push_back(&t.destination.name);
            }
        }
    }
    seen
}
