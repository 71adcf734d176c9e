//! Interaction sets induced by connectors and configurations.
//!
//! A node whose children are all synchrons yields one interaction per way of
//! picking an interaction from every child. As soon as one child is a
//! trigger, any non-empty selection of children containing a trigger may
//! fire, again taking exactly one interaction from each selected child.

use crate::model::{Configuration, ConnectorNode, ConnectorPayload, Interaction, InteractionSet, Typing};

pub fn interactions_of_connector(node: &ConnectorNode) -> InteractionSet {
    let children = match &node.payload {
        ConnectorPayload::Leaf(p) => return InteractionSet::from([Interaction::singleton(p.clone())]),
        ConnectorPayload::Children(cs) => cs,
    };
    let child_sets: Vec<InteractionSet> = children.iter().map(interactions_of_connector).collect();
    let triggers: Vec<bool> = children.iter().map(|c| c.typing == Typing::Trigger).collect();

    if !triggers.contains(&true) {
        return product(child_sets.iter());
    }

    assert!(children.len() < usize::BITS as usize, "connector node has too many children");
    let mut out = InteractionSet::new();
    for mask in 1usize..(1 << children.len()) {
        let selected = |i: usize| mask & (1 << i) != 0;
        if !(0..children.len()).any(|i| selected(i) && triggers[i]) {
            continue;
        }
        out.extend(product(child_sets.iter().enumerate().filter(|(i, _)| selected(*i)).map(|(_, s)| s)));
    }
    out
}

/// All unions formed by taking one interaction from each of the given sets.
fn product<'a>(sets: impl Iterator<Item = &'a InteractionSet>) -> InteractionSet {
    let mut acc: Option<InteractionSet> = None;
    for set in sets {
        acc = Some(match acc {
            None => set.clone(),
            Some(prev) => prev.iter().flat_map(|a| set.iter().map(move |b| a.union(b))).collect(),
        });
    }
    acc.unwrap_or_default()
}

pub fn interactions_of_configuration(config: &Configuration) -> InteractionSet {
    config.connectors().iter().flat_map(|c| interactions_of_connector(&c.root)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PortInstance;

    fn port(c: &str, i: u32) -> PortInstance {
        PortInstance::new(c, i, "x")
    }

    fn names(set: &InteractionSet) -> Vec<String> {
        set.iter().map(|a| a.to_string()).collect()
    }

    #[test]
    fn all_synchron_gives_the_maximal_interaction() {
        let c = ConnectorNode::flat([
            (port("s", 1), Typing::Synchron),
            (port("r", 1), Typing::Synchron),
            (port("r", 2), Typing::Synchron),
        ])
        .unwrap();
        assert_eq!(names(&interactions_of_connector(&c)), ["r[1].x r[2].x s[1].x"]);
    }

    #[test]
    fn trigger_connector_from_figure_five() {
        let c = ConnectorNode::flat([
            (PortInstance::new("T1", 1, "p"), Typing::Synchron),
            (PortInstance::new("T2", 1, "q"), Typing::Trigger),
            (PortInstance::new("T2", 2, "q"), Typing::Trigger),
        ])
        .unwrap();
        let got = interactions_of_connector(&c);
        assert_eq!(got.len(), 6);
        assert_eq!(
            names(&got),
            ["T1[1].p T2[1].q", "T1[1].p T2[1].q T2[2].q", "T1[1].p T2[2].q", "T2[1].q", "T2[1].q T2[2].q", "T2[2].q",]
        );
    }

    #[test]
    fn hierarchical_trigger_over_synchron_subconnector() {
        let sub = ConnectorNode::node(
            Typing::Synchron,
            vec![
                ConnectorNode::leaf(port("r", 1), Typing::Synchron),
                ConnectorNode::leaf(port("r", 2), Typing::Synchron),
            ],
        )
        .unwrap();
        let root = ConnectorNode::node(Typing::Synchron, vec![ConnectorNode::leaf(port("s", 1), Typing::Trigger), sub])
            .unwrap();
        assert_eq!(names(&interactions_of_connector(&root)), ["r[1].x r[2].x s[1].x", "s[1].x"]);
    }

    #[test]
    fn leaf_is_a_singleton() {
        let leaf = ConnectorNode::leaf(port("p", 1), Typing::Synchron);
        assert_eq!(names(&interactions_of_connector(&leaf)), ["p[1].x"]);
    }
}
