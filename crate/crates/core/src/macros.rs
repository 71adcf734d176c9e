//! Require/Accept macros: encoding of diagrams, extensional semantics and
//! the diagram-versus-macro equivalence check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diagram::{expand_unique, DiagramError, EncodabilityReport};
use crate::interaction::interactions_of_configuration;
use crate::model::{CardinalityAssignment, Interaction, InteractionSet, Model, PortInstance, PortTypeRef, Typing};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RequireMode {
    /// Companion counts must match the option exactly.
    #[serde(rename = "exact")]
    Exact,
    /// Companion counts must reach the option's counts.
    #[serde(rename = "atLeast")]
    AtLeast,
}

impl RequireMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RequireMode::Exact => "exact",
            RequireMode::AtLeast => "atLeast",
        }
    }
}

/// One alternative on the right-hand side of a Require macro.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RequireOption {
    /// No other port is needed.
    Dash,
    Ports {
        motif: String,
        mode: RequireMode,
        counts: BTreeMap<PortTypeRef, u32>,
    },
}

/// Right-hand side of an Accept macro.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Accept {
    /// Must not synchronise with any other port.
    Dash,
    Ports(BTreeSet<PortTypeRef>),
}

impl Accept {
    pub fn admits(&self, port: &PortTypeRef) -> bool {
        match self {
            Accept::Dash => false,
            Accept::Ports(set) => set.contains(port),
        }
    }

    fn merge(current: Option<Accept>, add: Accept) -> Accept {
        match (current, add) {
            (None, a) | (Some(Accept::Dash), a) => a,
            (Some(Accept::Ports(s)), Accept::Dash) => Accept::Ports(s),
            (Some(Accept::Ports(mut s)), Accept::Ports(t)) => {
                s.extend(t);
                Accept::Ports(s)
            }
        }
    }
}

/// Require options and Accept sets per port type. Option lists are kept
/// sorted (DASH first, then by motif id) and free of duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Macros {
    pub require: BTreeMap<PortTypeRef, Vec<RequireOption>>,
    pub accept: BTreeMap<PortTypeRef, Accept>,
}

impl Macros {
    pub fn port_types(&self) -> BTreeSet<PortTypeRef> {
        self.require.keys().chain(self.accept.keys()).cloned().collect()
    }

    pub fn add_require(&mut self, port: PortTypeRef, option: RequireOption) {
        let list = self.require.entry(port).or_default();
        if let Err(at) = list.binary_search(&option) {
            list.insert(at, option);
        }
    }

    pub fn add_accept(&mut self, port: PortTypeRef, accept: Accept) {
        let current = self.accept.remove(&port);
        self.accept.insert(port, Accept::merge(current, accept));
    }
}

fn render_counts(counts: &BTreeMap<PortTypeRef, u32>) -> String {
    let mut parts = Vec::new();
    for (t, &c) in counts {
        parts.extend(std::iter::repeat_n(t.to_string(), c as usize));
    }
    parts.join(" ")
}

/// One `T.p Require …` and one `T.p Accept …` line per port type. Options
/// are separated by ` ; `; at-least options carry a `>=` prefix.
impl fmt::Display for Macros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for port in self.port_types() {
            let options: Vec<String> = self
                .require
                .get(&port)
                .map(|opts| {
                    opts.iter()
                        .map(|o| match o {
                            RequireOption::Dash => "-".to_string(),
                            RequireOption::Ports { mode: RequireMode::Exact, counts, .. } => render_counts(counts),
                            RequireOption::Ports { mode: RequireMode::AtLeast, counts, .. } => {
                                format!(">= {}", render_counts(counts))
                            }
                        })
                        .collect()
                })
                .unwrap_or_default();
            writeln!(f, "{port} Require {}", options.join(" ; "))?;
            let accept = match self.accept.get(&port) {
                Some(Accept::Ports(set)) => set.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
                _ => "-".to_string(),
            };
            writeln!(f, "{port} Accept {accept}")?;
        }
        Ok(())
    }
}

/// Encodes every port type used by some motif into Require/Accept macros.
/// Only the diagram's types are consulted; cardinalities play no part.
pub fn encode_macros(model: &Model) -> Macros {
    let mut macros = Macros::default();
    for component in &model.components {
        for port_name in &component.ports {
            let p = PortTypeRef::new(&component.name.name, &port_name.name);
            for motif in model.diagram.motifs.iter().filter(|m| m.end(&p).is_some()) {
                let end = motif.end(&p).expect("filtered on membership");
                if motif.ends.len() == 1 {
                    macros.add_require(p.clone(), RequireOption::Dash);
                    macros.add_accept(p.clone(), Accept::Dash);
                    continue;
                }
                let others = motif.ends.iter().filter(|e| e.port != p || end.multiplicity > 1);
                macros.add_accept(p.clone(), Accept::Ports(others.map(|e| e.port.clone()).collect()));

                if end.typing == Typing::Trigger {
                    macros.add_require(p.clone(), RequireOption::Dash);
                } else if motif.has_trigger() {
                    for trigger in motif.ends.iter().filter(|e| e.typing == Typing::Trigger) {
                        macros.add_require(
                            p.clone(),
                            RequireOption::Ports {
                                motif: motif.id.name.clone(),
                                mode: RequireMode::AtLeast,
                                counts: BTreeMap::from([(trigger.port.clone(), 1)]),
                            },
                        );
                    }
                } else {
                    let mut counts: BTreeMap<PortTypeRef, u32> =
                        motif.ends.iter().filter(|e| e.port != p).map(|e| (e.port.clone(), e.multiplicity)).collect();
                    if end.multiplicity > 1 {
                        counts.insert(p.clone(), end.multiplicity - 1);
                    }
                    macros.add_require(
                        p.clone(),
                        RequireOption::Ports { motif: motif.id.name.clone(), mode: RequireMode::Exact, counts },
                    );
                }
            }
        }
    }
    macros
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MacroMode {
    /// Options of all members must come from one motif (or be DASH).
    #[default]
    Scoped,
    /// Any option of a port type may be used, regardless of its motif.
    Flat,
}

#[derive(Debug, Error)]
pub enum MacroError {
    #[error("universe of {size} port instances exceeds the enumeration bound of {bound}")]
    UniverseTooLarge { size: usize, bound: usize },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

fn option_holds(option: &RequireOption, companions: &BTreeMap<&PortTypeRef, u32>) -> bool {
    match option {
        RequireOption::Dash => true,
        RequireOption::Ports { mode: RequireMode::AtLeast, counts, .. } => {
            counts.iter().all(|(t, &c)| companions.get(t).copied().unwrap_or(0) >= c)
        }
        RequireOption::Ports { mode: RequireMode::Exact, counts, .. } => {
            counts.iter().all(|(t, &c)| companions.get(t).copied().unwrap_or(0) == c)
                && companions.iter().all(|(t, &c)| c == 0 || counts.contains_key(*t))
        }
    }
}

/// Port types a motif's options speak about: the types carrying options
/// tagged with the motif and the types those options count.
fn motif_scopes(macros: &Macros) -> BTreeMap<&str, BTreeSet<&PortTypeRef>> {
    let mut scopes: BTreeMap<&str, BTreeSet<&PortTypeRef>> = BTreeMap::new();
    for (port, options) in &macros.require {
        for option in options {
            if let RequireOption::Ports { motif, counts, .. } = option {
                let scope = scopes.entry(motif.as_str()).or_default();
                scope.insert(port);
                scope.extend(counts.keys());
            }
        }
    }
    scopes
}

/// Whether an interaction is allowed by the macros.
pub fn macro_admits(macros: &Macros, interaction: &Interaction, mode: MacroMode) -> bool {
    let members: Vec<(&PortInstance, PortTypeRef)> = interaction.iter().map(|p| (p, p.port_type())).collect();
    let mut type_counts: BTreeMap<&PortTypeRef, u32> = BTreeMap::new();
    for (_, t) in &members {
        *type_counts.entry(t).or_default() += 1;
    }

    // Accept: every companion's type must be admitted.
    for (i, (_, t)) in members.iter().enumerate() {
        let Some(accept) = macros.accept.get(t) else { return false };
        if members.iter().enumerate().any(|(j, (_, u))| i != j && !accept.admits(u)) {
            return false;
        }
    }

    let companions = |t: &PortTypeRef| {
        let mut c = type_counts.clone();
        if let Some(n) = c.get_mut(t) {
            *n -= 1;
        }
        c
    };
    let options_of = |t: &PortTypeRef| macros.require.get(t).map(Vec::as_slice).unwrap_or(&[]);
    let has_dash = |t: &PortTypeRef| options_of(t).contains(&RequireOption::Dash);

    match mode {
        MacroMode::Flat => members.iter().all(|(_, t)| options_of(t).iter().any(|o| option_holds(o, &companions(t)))),
        MacroMode::Scoped => {
            if members.iter().all(|(_, t)| has_dash(t)) {
                return true;
            }
            motif_scopes(macros).iter().any(|(motif, scope)| {
                type_counts.keys().all(|t| scope.contains(t))
                    && members.iter().all(|(_, t)| {
                        has_dash(t)
                            || options_of(t).iter().any(|o| {
                                matches!(o, RequireOption::Ports { motif: m, .. } if m == motif)
                                    && option_holds(o, &companions(t))
                            })
                    })
            })
        }
    }
}

/// Every non-empty set of port instances allowed by the macros, found by
/// enumerating all subsets of the instance universe.
pub fn interactions_from_macros(
    macros: &Macros,
    cards: &CardinalityAssignment,
    bound: usize,
    mode: MacroMode,
) -> Result<InteractionSet, MacroError> {
    let universe: Vec<PortInstance> = macros.port_types().iter().flat_map(|t| cards.port_instances(t)).collect();
    if universe.len() > bound || universe.len() >= usize::BITS as usize {
        return Err(MacroError::UniverseTooLarge { size: universe.len(), bound });
    }
    let mut out = InteractionSet::new();
    for mask in 1usize..(1 << universe.len()) {
        let a =
            Interaction::new(universe.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, p)| p.clone()))
                .expect("mask is non-zero");
        if macro_admits(macros, &a, mode) {
            out.insert(a);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub equal: bool,
    pub only_in_diagram: InteractionSet,
    pub only_in_macros: InteractionSet,
}

/// Compares the interactions of the diagram's unique configuration with
/// those admitted by its macro encoding.
pub fn check_equivalence(
    model: &Model,
    cards: &CardinalityAssignment,
    bound: usize,
) -> Result<EquivalenceReport, MacroError> {
    let config = expand_unique(model, cards)?;
    let from_diagram = interactions_of_configuration(&config);
    let from_macros = interactions_from_macros(&encode_macros(model), cards, bound, MacroMode::Scoped)?;
    let only_in_diagram: InteractionSet = from_diagram.difference(&from_macros).cloned().collect();
    let only_in_macros: InteractionSet = from_macros.difference(&from_diagram).cloned().collect();
    Ok(EquivalenceReport {
        equal: only_in_diagram.is_empty() && only_in_macros.is_empty(),
        only_in_diagram,
        only_in_macros,
    })
}

/// The encodability report backing a failed equivalence precondition.
pub fn not_encodable_report(err: &MacroError) -> Option<&EncodabilityReport> {
    match err {
        MacroError::Diagram(DiagramError::NotEncodable(r)) => Some(r),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn t(c: &str, p: &str) -> PortTypeRef {
        PortTypeRef::new(c, p)
    }

    fn model(ends: &str) -> Model {
        parse_model(
            &format!(
                "component T1 (n=1) {{ ports p states s initial s s -> s on p }}
                 component T2 (n=1) {{ ports q states s initial s s -> s on q }}
                 diagram {{ motif g {{ {ends} }} }}"
            ),
            "t.bip",
        )
        .unwrap()
    }

    fn cards(n1: u32, n2: u32) -> CardinalityAssignment {
        CardinalityAssignment::new([("T1".to_string(), n1), ("T2".to_string(), n2)])
    }

    const STAR: &str = "component C (n=1) { ports p  states s0 initial s0  s0 -> s0 on p }
component S (n=3) { ports q  states s0 initial s0  s0 -> s0 on q }
diagram { motif star { C.p[m=1,d=3] sync, S.q[m=1,d=1] sync } }";

    #[test]
    fn star_macros() {
        let m = parse_model(STAR, "star.bip").unwrap();
        let macros = encode_macros(&m);
        assert_eq!(macros.to_string(), "C.p Require S.q\nC.p Accept S.q\nS.q Require C.p\nS.q Accept C.p\n");
        let cards = CardinalityAssignment::new([("C".to_string(), 1), ("S".to_string(), 3)]);
        let got = interactions_from_macros(&macros, &cards, 20, MacroMode::Scoped).unwrap();
        let rendered: Vec<_> = got.iter().map(|a| a.to_string()).collect();
        assert_eq!(rendered, ["C[1].p S[1].q", "C[1].p S[2].q", "C[1].p S[3].q"]);
    }

    #[test]
    fn figure_four_macros() {
        let macros = encode_macros(&model("T1.p[m=1,d=1] sync, T2.q[m=2,d=1] trigger"));
        assert_eq!(macros.accept[&t("T1", "p")], Accept::Ports(BTreeSet::from([t("T2", "q")])));
        assert_eq!(
            macros.require[&t("T1", "p")],
            [RequireOption::Ports {
                motif: "g".into(),
                mode: RequireMode::AtLeast,
                counts: BTreeMap::from([(t("T2", "q"), 1)])
            }]
        );
        assert_eq!(macros.accept[&t("T2", "q")], Accept::Ports(BTreeSet::from([t("T1", "p"), t("T2", "q")])));
        assert_eq!(macros.require[&t("T2", "q")], [RequireOption::Dash]);

        let got = interactions_from_macros(&macros, &cards(1, 2), 20, MacroMode::Scoped).unwrap();
        let rendered: Vec<_> = got.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            rendered,
            ["T1[1].p T2[1].q", "T1[1].p T2[1].q T2[2].q", "T1[1].p T2[2].q", "T2[1].q", "T2[1].q T2[2].q", "T2[2].q",]
        );
    }

    #[test]
    fn singleton_motif() {
        let m = parse_model(
            "component T1 (n=3) { ports p states s initial s s -> s on p } diagram { motif u { T1.p[m=1,d=1] sync } }",
            "u.bip",
        )
        .unwrap();
        let macros = encode_macros(&m);
        assert_eq!(macros.require[&t("T1", "p")], [RequireOption::Dash]);
        assert_eq!(macros.accept[&t("T1", "p")], Accept::Dash);
        let cards = CardinalityAssignment::new([("T1".to_string(), 3)]);
        let got = interactions_from_macros(&macros, &cards, 20, MacroMode::Scoped).unwrap();
        assert_eq!(got.iter().map(|a| a.to_string()).collect::<Vec<_>>(), ["T1[1].p", "T1[2].p", "T1[3].p"]);
    }

    #[test]
    fn all_synchron_option_counts_own_type() {
        let macros = encode_macros(&model("T1.p[m=2,d=1] sync, T2.q[m=1,d=1] sync"));
        assert_eq!(
            macros.require[&t("T1", "p")],
            [RequireOption::Ports {
                motif: "g".into(),
                mode: RequireMode::Exact,
                counts: BTreeMap::from([(t("T1", "p"), 1), (t("T2", "q"), 1)])
            }]
        );
        assert_eq!(macros.accept[&t("T1", "p")], Accept::Ports(BTreeSet::from([t("T1", "p"), t("T2", "q")])));
    }

    #[test]
    fn encoding_ignores_cardinalities() {
        let a = model("T1.p[m=1,d=2] sync, T2.q[m=1,d=2] sync");
        let mut b = a.clone();
        b.components[0].cardinality = crate::model::Cardinality::Symbolic("k".into());
        assert_eq!(encode_macros(&a), encode_macros(&b));
    }

    #[test]
    fn equivalence_on_figures() {
        let trigger_pair = model("T1.p[m=1,d=1] sync, T2.q[m=2,d=1] trigger");
        assert!(check_equivalence(&trigger_pair, &cards(1, 2), 20).unwrap().equal);
        let bipartite = model("T1.p[m=1,d=2] sync, T2.q[m=1,d=2] sync");
        let report = check_equivalence(&bipartite, &cards(2, 2), 20).unwrap();
        assert!(report.equal);
        let matching = model("T1.p[m=1,d=1] sync, T2.q[m=1,d=1] sync");
        let err = check_equivalence(&matching, &cards(2, 2), 20).unwrap_err();
        assert!(not_encodable_report(&err).is_some());
    }

    #[test]
    fn universe_bound() {
        let bipartite = model("T1.p[m=1,d=2] sync, T2.q[m=1,d=2] sync");
        let macros = encode_macros(&bipartite);
        assert!(matches!(
            interactions_from_macros(&macros, &cards(2, 2), 3, MacroMode::Scoped),
            Err(MacroError::UniverseTooLarge { size: 4, bound: 3 })
        ));
    }
}
