use std::fmt::Write;

use crate::model::{Model, TransitionKind};

fn names(list: &[crate::model::Ident]) -> String {
    list.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

pub(crate) fn print(model: &Model) -> String {
    let mut out = String::new();
    for c in &model.components {
        let _ = writeln!(out, "component {} (n={}) {{", c.name, c.cardinality);
        let _ = writeln!(out, "  ports {}", names(&c.ports));
        if !c.events.is_empty() {
            let _ = writeln!(out, "  events {}", names(&c.events));
        }
        let _ = writeln!(out, "  states {}", names(&c.lts.states));
        for i in &c.lts.initial {
            let _ = writeln!(out, "  initial {i}");
        }
        for t in &c.lts.transitions {
            let label = match &t.kind {
                TransitionKind::Enforceable(p) => format!("on {p}"),
                TransitionKind::Spontaneous(e) => format!("when {e}"),
                TransitionKind::Internal => "internal".to_string(),
            };
            let _ = writeln!(out, "  {} -> {} {label}", t.source, t.destination);
        }
        out.push_str("}\n\n");
    }
    out.push_str("diagram {\n");
    for m in &model.diagram.motifs {
        let ends: Vec<_> = m
            .ends
            .iter()
            .map(|e| format!("{}[m={},d={}] {}", e.port, e.multiplicity, e.degree, e.typing.keyword()))
            .collect();
        let _ = writeln!(out, "  motif {} {{ {} }}", m.id, ends.join(", "));
    }
    out.push_str("}\n");
    out
}
