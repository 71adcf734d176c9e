//! Architecture-diagram semantics.
//!
//! A motif end `T.p[m,d]` asks for connectors holding exactly `m` instances
//! of `p` each, with every instance of `p` attached to exactly `d` of the
//! motif's connectors. [`enumerate_configurations`] searches all connector
//! sets meeting those constraints and serves as the oracle for
//! [`check_encodable`] and [`expand_unique`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::model::{
    CardinalityAssignment, Configuration, Connector, ConnectorMotif, ConnectorNode, Diagnostic, InstanceId, Model,
    MotifEnd, PortInstance, PortTypeRef,
};

/// Default budget of search nodes for [`enumerate_configurations`].
pub const DEFAULT_NODE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("diagram is not encodable: {}", .0.summary())]
    NotEncodable(Box<EncodabilityReport>),
    #[error("enumeration limit of {limit} search nodes exceeded after finding {found} configuration(s)")]
    LimitExceeded { limit: u64, found: usize },
}

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}

/// `s_p = n_p · d_p / m_p`, exact.
pub fn matching_factor(end: &MotifEnd, cards: &CardinalityAssignment) -> Ratio<u64> {
    let n = u64::from(cards.of(&end.port.component));
    Ratio::new(n * u64::from(end.degree), u64::from(end.multiplicity))
}

/// Number of distinct connectors a motif can produce: `∏ C(n_q, m_q)`.
/// Zero when some multiplicity exceeds its cardinality.
pub fn max_connectors(motif: &ConnectorMotif, cards: &CardinalityAssignment) -> u128 {
    motif.ends.iter().map(|e| binomial(cards.of(&e.port.component), e.multiplicity)).product()
}

fn ser_ratio<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndReport {
    pub motif: String,
    pub port: PortTypeRef,
    pub cardinality: u32,
    pub multiplicity: u32,
    pub degree: u32,
    #[serde(serialize_with = "ser_ratio")]
    pub matching_factor: Ratio<u64>,
    pub integral: bool,
    pub max_connectors: u128,
    /// `m_p ≤ n_p`
    pub cond1: bool,
    /// `s_p = ∏ C(n_q, m_q)`
    pub cond2: bool,
}

impl EndReport {
    pub fn ok(&self) -> bool {
        self.cond1 && self.cond2 && self.integral
    }
}

impl fmt::Display for EndReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: n={} m={} d={} matching factor {} max connectors {} cond1={} cond2={}",
            self.motif,
            self.port,
            self.cardinality,
            self.multiplicity,
            self.degree,
            self.matching_factor,
            self.max_connectors,
            self.cond1,
            self.cond2
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EncodabilityReport {
    pub ends: Vec<EndReport>,
    pub verdict: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl EncodabilityReport {
    pub fn summary(&self) -> String {
        let msgs: Vec<_> = self.diagnostics.iter().map(|d| d.message.as_str()).collect();
        msgs.join("; ")
    }
}

pub fn check_encodable(model: &Model, cards: &CardinalityAssignment) -> EncodabilityReport {
    let mut ends = Vec::new();
    let mut diagnostics = Vec::new();
    for motif in &model.diagram.motifs {
        let max = max_connectors(motif, cards);
        for end in &motif.ends {
            let n = cards.of(&end.port.component);
            let s = matching_factor(end, cards);
            let integral = s.is_integer();
            let cond1 = end.multiplicity <= n;
            let cond2 = integral && u128::from(s.to_integer()) == max;
            let node = format!("diagram/motif[{}]/end[{}]", motif.id, end.port);
            let prefix = format!("Port type [{}] in connector motif [{}]", end.port, motif.id);
            if !cond1 {
                diagnostics.push(Diagnostic::error(
                    "MULTIPLICITY_EXCEEDS_CARDINALITY",
                    format!("{prefix}: multiplicity {} exceeds cardinality {n}.", end.multiplicity),
                    node.clone(),
                    &end.span,
                ));
            }
            if !integral {
                diagnostics.push(Diagnostic::error(
                    "NON_INTEGRAL_MATCHING_FACTOR",
                    format!("{prefix}: matching factor {s} is not an integer."),
                    node.clone(),
                    &end.span,
                ));
            } else if !cond2 {
                diagnostics.push(Diagnostic::error(
                    "MATCHING_FACTOR_MISMATCH",
                    format!("{prefix}: matching factor {s} ≠ max connectors {max}."),
                    node.clone(),
                    &end.span,
                ));
            }
            ends.push(EndReport {
                motif: motif.id.name.clone(),
                port: end.port.clone(),
                cardinality: n,
                multiplicity: end.multiplicity,
                degree: end.degree,
                matching_factor: s,
                integral,
                max_connectors: max,
                cond1,
                cond2,
            });
        }
    }
    let verdict = ends.iter().all(EndReport::ok);
    EncodabilityReport { ends, verdict, diagnostics }
}

/// All `k`-subsets of `1..=n`, lexicographically.
fn combinations(n: u32, k: u32) -> Vec<Vec<u32>> {
    fn go(start: u32, n: u32, k: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k as usize {
            out.push(cur.clone());
            return;
        }
        let remaining = k - cur.len() as u32;
        for i in start..=n.saturating_sub(remaining - 1) {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(1, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Every connector a motif can produce, lexicographically by per-end index sets.
fn motif_candidates(motif: &ConnectorMotif, cards: &CardinalityAssignment) -> Vec<Vec<Vec<u32>>> {
    let per_end: Vec<Vec<Vec<u32>>> =
        motif.ends.iter().map(|e| combinations(cards.of(&e.port.component), e.multiplicity)).collect();
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for choices in &per_end {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn build_connector(motif: &ConnectorMotif, choice: &[Vec<u32>]) -> Connector {
    let leaves =
        motif.ends.iter().zip(choice).flat_map(|(e, idx)| idx.iter().map(move |&i| (e.port.instance(i), e.typing)));
    Connector {
        motif: motif.id.name.clone(),
        root: ConnectorNode::flat(leaves).expect("motif ends are non-empty and distinct"),
    }
}

/// The unique conforming configuration of an encodable diagram: every
/// connector each motif can produce.
pub fn expand_unique(model: &Model, cards: &CardinalityAssignment) -> Result<Configuration, DiagramError> {
    let report = check_encodable(model, cards);
    if !report.verdict {
        return Err(DiagramError::NotEncodable(Box::new(report)));
    }
    let connectors = model
        .diagram
        .motifs
        .iter()
        .flat_map(|m| motif_candidates(m, cards).into_iter().map(move |c| build_connector(m, &c)));
    Ok(Configuration::new(connectors))
}

#[derive(Clone, Copy, Debug)]
pub struct EnumerateOptions {
    /// Search nodes visited before giving up with [`DiagramError::LimitExceeded`].
    pub node_limit: u64,
    /// Stop once this many configurations are found.
    pub max_solutions: Option<usize>,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { node_limit: DEFAULT_NODE_LIMIT, max_solutions: None }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Free,
    Chosen,
    Excluded,
}

/// Exact-degree search over the candidate connectors of one motif.
///
/// Items are (end, instance) pairs that must be covered exactly `d` times.
/// Each step takes the item with the least slack and decides at once which
/// of its free candidates it uses, so every solution is reached exactly once.
struct MotifSearch<'a> {
    cand_items: Vec<Vec<usize>>,
    item_cands: Vec<Vec<usize>>,
    need: Vec<i64>,
    avail: Vec<i64>,
    status: Vec<Status>,
    solutions: Vec<Vec<usize>>,
    visited: &'a mut u64,
    limit: u64,
    cap: Option<usize>,
}

impl MotifSearch<'_> {
    fn feasible(&self) -> bool {
        self.need.iter().zip(&self.avail).all(|(n, a)| *n >= 0 && n <= a)
    }

    fn done(&self) -> bool {
        self.cap.is_some_and(|c| self.solutions.len() >= c)
    }

    fn set(&mut self, cand: usize, status: Status) {
        debug_assert!(self.status[cand] == Status::Free);
        self.status[cand] = status;
        for &it in &self.cand_items[cand] {
            self.avail[it] -= 1;
            if status == Status::Chosen {
                self.need[it] -= 1;
            }
        }
    }

    fn unset(&mut self, cand: usize) {
        let status = self.status[cand];
        self.status[cand] = Status::Free;
        for &it in &self.cand_items[cand] {
            self.avail[it] += 1;
            if status == Status::Chosen {
                self.need[it] += 1;
            }
        }
    }

    fn run(&mut self) -> Result<(), u64> {
        *self.visited += 1;
        if *self.visited > self.limit {
            return Err(*self.visited);
        }
        let pick =
            (0..self.need.len()).filter(|&i| self.need[i] > 0).min_by_key(|&i| (self.avail[i] - self.need[i], i));
        let Some(item) = pick else {
            let chosen = (0..self.status.len()).filter(|&c| self.status[c] == Status::Chosen).collect();
            self.solutions.push(chosen);
            return Ok(());
        };
        let free: Vec<usize> =
            self.item_cands[item].iter().copied().filter(|&c| self.status[c] == Status::Free).collect();
        let need = self.need[item] as usize;
        for subset in index_combinations(free.len(), need) {
            let chosen: Vec<usize> = subset.iter().map(|&i| free[i]).collect();
            let excluded: Vec<usize> = free.iter().copied().filter(|c| !chosen.contains(c)).collect();
            chosen.iter().for_each(|&c| self.set(c, Status::Chosen));
            excluded.iter().for_each(|&c| self.set(c, Status::Excluded));
            let result = if self.feasible() { self.run() } else { Ok(()) };
            chosen.iter().chain(&excluded).for_each(|&c| self.unset(c));
            result?;
            if self.done() {
                break;
            }
        }
        Ok(())
    }
}

/// `k`-subsets of `0..n` as index lists, lexicographically.
fn index_combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    combinations(n as u32, k as u32).into_iter().map(|c| c.into_iter().map(|i| i as usize - 1).collect()).collect()
}

fn motif_solutions(
    motif: &ConnectorMotif,
    cards: &CardinalityAssignment,
    visited: &mut u64,
    opts: EnumerateOptions,
) -> Result<Vec<Vec<Connector>>, u64> {
    // Every end must imply the same integral number of connectors.
    let factors: BTreeSet<Ratio<u64>> = motif.ends.iter().map(|e| matching_factor(e, cards)).collect();
    if factors.len() != 1 || !factors.iter().all(|s| s.is_integer()) {
        *visited += 1;
        return Ok(Vec::new());
    }

    let candidates = motif_candidates(motif, cards);
    let mut item_index: BTreeMap<(usize, u32), usize> = BTreeMap::new();
    let mut need = Vec::new();
    for (ei, e) in motif.ends.iter().enumerate() {
        for i in 1..=cards.of(&e.port.component) {
            item_index.insert((ei, i), need.len());
            need.push(i64::from(e.degree));
        }
    }
    let mut item_cands = vec![Vec::new(); need.len()];
    let cand_items: Vec<Vec<usize>> = candidates
        .iter()
        .enumerate()
        .map(|(ci, choice)| {
            let items: Vec<usize> = choice
                .iter()
                .enumerate()
                .flat_map(|(ei, idx)| idx.iter().map(move |&i| (ei, i)))
                .map(|k| item_index[&k])
                .collect();
            items.iter().for_each(|&it| item_cands[it].push(ci));
            items
        })
        .collect();
    let avail = item_cands.iter().map(|c| c.len() as i64).collect();

    let mut search = MotifSearch {
        cand_items,
        item_cands,
        need,
        avail,
        status: vec![Status::Free; candidates.len()],
        solutions: Vec::new(),
        visited,
        limit: opts.node_limit,
        cap: opts.max_solutions,
    };
    if search.feasible() {
        search.run()?;
    }
    Ok(search
        .solutions
        .into_iter()
        .map(|sol| sol.into_iter().map(|c| build_connector(motif, &candidates[c])).collect())
        .collect())
}

/// All configurations conforming to the diagram, in canonical order.
///
/// Motifs are solved independently and combined; the empty configuration is
/// never returned.
pub fn enumerate_configurations(
    model: &Model,
    cards: &CardinalityAssignment,
    opts: EnumerateOptions,
) -> Result<Vec<Configuration>, DiagramError> {
    let mut visited = 0u64;
    let mut combined: Vec<Vec<Connector>> = vec![Vec::new()];
    let mut found_so_far = 0;
    for motif in &model.diagram.motifs {
        let sols = motif_solutions(motif, cards, &mut visited, opts)
            .map_err(|_| DiagramError::LimitExceeded { limit: opts.node_limit, found: found_so_far })?;
        combined = combined
            .into_iter()
            .flat_map(|prefix| {
                sols.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.extend(s.iter().cloned());
                    next
                })
            })
            .collect();
        if let Some(cap) = opts.max_solutions {
            combined.truncate(cap.max(1));
        }
        found_so_far = combined.len();
    }
    let mut out: Vec<Configuration> = combined.into_iter().filter(|c| !c.is_empty()).map(Configuration::new).collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// A set of component instances with a configuration over their ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub components: Vec<InstanceId>,
    pub configuration: Configuration,
}

impl Architecture {
    /// All instances named by `cards`, wired by `configuration`.
    pub fn with_instances(cards: &CardinalityAssignment, configuration: Configuration) -> Self {
        Architecture { components: cards.instances(), configuration }
    }
}

/// Whether the architecture conforms to the diagram: instance counts match
/// the cardinalities, and the connectors can be split into per-motif sets
/// with exact multiplicities and degrees.
pub fn conforms(arch: &Architecture, model: &Model, cards: &CardinalityAssignment) -> bool {
    let instances: BTreeSet<&InstanceId> = arch.components.iter().collect();
    if instances.len() != arch.components.len() {
        return false;
    }
    for c in &model.components {
        let n = cards.of(&c.name.name);
        let present = instances.iter().filter(|i| i.component == c.name.name).count();
        if present != n as usize
            || instances.iter().any(|i| i.component == c.name.name && (i.index == 0 || i.index > n))
        {
            return false;
        }
    }
    if instances.iter().any(|i| model.component(&i.component).is_none()) {
        return false;
    }

    // Motifs each connector could belong to.
    let mut fits: Vec<Vec<usize>> = Vec::new();
    for conn in arch.configuration.connectors() {
        if !conn.root.is_flat() {
            return false;
        }
        let leaves = conn.root.leaves();
        if leaves.iter().any(|(p, _)| !instances.contains(&p.instance())) {
            return false;
        }
        let options: Vec<usize> = model
            .diagram
            .motifs
            .iter()
            .enumerate()
            .filter(|(_, m)| connector_fits(m, &leaves))
            .map(|(i, _)| i)
            .collect();
        if options.is_empty() {
            return false;
        }
        fits.push(options);
    }

    let mut degree: BTreeMap<(usize, PortInstance), u32> = BTreeMap::new();
    assign(0, arch, model, &fits, &mut degree)
}

fn connector_fits(motif: &ConnectorMotif, leaves: &[(&PortInstance, crate::model::Typing)]) -> bool {
    let mut counts: BTreeMap<PortTypeRef, u32> = BTreeMap::new();
    for (p, typing) in leaves {
        match motif.end(&p.port_type()) {
            Some(end) if end.typing == *typing => *counts.entry(end.port.clone()).or_default() += 1,
            _ => return false,
        }
    }
    motif.ends.iter().all(|e| counts.get(&e.port).copied().unwrap_or(0) == e.multiplicity)
}

fn assign(
    at: usize,
    arch: &Architecture,
    model: &Model,
    fits: &[Vec<usize>],
    degree: &mut BTreeMap<(usize, PortInstance), u32>,
) -> bool {
    if at == fits.len() {
        return degrees_exact(arch, model, degree);
    }
    let leaves = arch.configuration.connectors()[at].root.leaves();
    for &mi in &fits[at] {
        let motif = &model.diagram.motifs[mi];
        let mut ok = true;
        for (p, _) in &leaves {
            let d = degree.entry((mi, (*p).clone())).or_default();
            *d += 1;
            if *d > motif.end(&p.port_type()).map_or(0, |e| e.degree) {
                ok = false;
            }
        }
        if ok && assign(at + 1, arch, model, fits, degree) {
            return true;
        }
        for (p, _) in &leaves {
            *degree.get_mut(&(mi, (*p).clone())).expect("incremented above") -= 1;
        }
    }
    false
}

fn degrees_exact(arch: &Architecture, model: &Model, degree: &BTreeMap<(usize, PortInstance), u32>) -> bool {
    model.diagram.motifs.iter().enumerate().all(|(mi, motif)| {
        motif.ends.iter().all(|end| {
            arch.components.iter().filter(|i| i.component == end.port.component).all(|inst| {
                let p = inst.port(&end.port.port);
                degree.get(&(mi, p)).copied().unwrap_or(0) == end.degree
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

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

    fn render(c: &Configuration) -> Vec<String> {
        c.connectors().iter().map(|c| c.root.to_string()).collect()
    }

    const MATCHING: &str = "T1.p[m=1,d=1] sync, T2.q[m=1,d=1] sync";
    const BIPARTITE: &str = "T1.p[m=1,d=2] sync, T2.q[m=1,d=2] sync";
    const TRIGGER_PAIR: &str = "T1.p[m=1,d=1] sync, T2.q[m=2,d=1] trigger";

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(1, 2), 0);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn matching_factors() {
        let m = model(MATCHING);
        assert_eq!(matching_factor(&m.diagram.motifs[0].ends[0], &cards(2, 2)), Ratio::from_integer(2));
        let m = model(BIPARTITE);
        assert_eq!(matching_factor(&m.diagram.motifs[0].ends[0], &cards(2, 2)), Ratio::from_integer(4));
        let end = MotifEnd::new(PortTypeRef::new("T1", "p"), 2, 1, crate::model::Typing::Synchron);
        assert_eq!(matching_factor(&end, &cards(3, 1)), Ratio::new(3, 2));
    }

    #[test]
    fn connector_bounds() {
        assert_eq!(max_connectors(&model(MATCHING).diagram.motifs[0], &cards(2, 2)), 4);
        let unary = model("T1.p[m=1,d=1] sync");
        assert_eq!(max_connectors(&unary.diagram.motifs[0], &cards(3, 1)), 3);
        let wide = model("T1.p[m=2,d=1] sync");
        assert_eq!(max_connectors(&wide.diagram.motifs[0], &cards(1, 1)), 0);
    }

    #[test]
    fn figure_six_is_not_encodable() {
        let m = model(MATCHING);
        let report = check_encodable(&m, &cards(2, 2));
        assert!(!report.verdict);
        assert_eq!(report.ends.len(), 2);
        for end in &report.ends {
            assert!(end.cond1 && !end.cond2);
        }
        assert!(report.diagnostics.iter().all(|d| d.message.contains("matching factor 2 ≠ max connectors 4")));
        assert!(matches!(expand_unique(&m, &cards(2, 2)), Err(DiagramError::NotEncodable(_))));

        let configs = enumerate_configurations(&m, &cards(2, 2), EnumerateOptions::default()).unwrap();
        let got: Vec<_> = configs.iter().map(render).collect();
        assert_eq!(
            got,
            [vec!["T1[1].p* T2[1].q*", "T1[2].p* T2[2].q*"], vec!["T1[1].p* T2[2].q*", "T1[2].p* T2[1].q*"],]
        );
    }

    #[test]
    fn figure_seven_has_one_configuration() {
        let m = model(BIPARTITE);
        assert!(check_encodable(&m, &cards(2, 2)).verdict);
        let unique = expand_unique(&m, &cards(2, 2)).unwrap();
        assert_eq!(
            render(&unique),
            ["T1[1].p* T2[1].q*", "T1[1].p* T2[2].q*", "T1[2].p* T2[1].q*", "T1[2].p* T2[2].q*"]
        );
        let all = enumerate_configurations(&m, &cards(2, 2), EnumerateOptions::default()).unwrap();
        assert_eq!(all, vec![unique]);
    }

    #[test]
    fn figure_four_expands_to_the_trigger_connector() {
        let m = model(TRIGGER_PAIR);
        let c = expand_unique(&m, &cards(1, 2)).unwrap();
        assert_eq!(render(&c), ["T1[1].p* T2[1].q! T2[2].q!"]);
        assert_eq!(c.connectors()[0].to_string(), "g: T1[1].p* T2[1].q! T2[2].q!");
    }

    #[test]
    fn unary_motif_expands_to_singletons() {
        let m = model("T1.p[m=1,d=1] sync");
        let c = expand_unique(&m, &cards(3, 1)).unwrap();
        assert_eq!(render(&c), ["T1[1].p*", "T1[2].p*", "T1[3].p*"]);
    }

    #[test]
    fn non_integral_factor_has_no_configuration() {
        let m = model("T1.p[m=1,d=1] sync, T2.q[m=2,d=1] sync");
        let report = check_encodable(&m, &cards(1, 3));
        assert!(!report.verdict);
        assert!(report.ends.iter().any(|e| !e.integral));
        assert!(enumerate_configurations(&m, &cards(1, 3), EnumerateOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn multiplicity_above_cardinality_fails_condition_one() {
        let m = model("T1.p[m=3,d=1] sync");
        let report = check_encodable(&m, &cards(2, 1));
        assert!(!report.ends[0].cond1);
        assert!(report.diagnostics.iter().any(|d| d.code == "MULTIPLICITY_EXCEEDS_CARDINALITY"));
    }

    #[test]
    fn conformance_of_figure_five() {
        let m = model(TRIGGER_PAIR);
        let cards = cards(1, 2);
        let config = expand_unique(&m, &cards).unwrap();
        let arch = Architecture::with_instances(&cards, config.clone());
        assert!(conforms(&arch, &m, &cards));

        let mut doubled = config.connectors().to_vec();
        doubled.push(doubled[0].clone());
        let arch2 = Architecture::with_instances(&cards, Configuration::new(doubled));
        assert!(!conforms(&arch2, &m, &cards));

        let mut extra = arch.clone();
        extra.components.push(InstanceId::new("T2", 3));
        assert!(!conforms(
            &extra,
            &m,
            &crate::model::CardinalityAssignment::new([("T1".to_string(), 1), ("T2".to_string(), 2)])
        ));
    }

    #[test]
    fn conformance_rejects_wrong_typing_and_counts() {
        let m = model(MATCHING);
        let cards = cards(2, 2);
        for config in enumerate_configurations(&m, &cards, EnumerateOptions::default()).unwrap() {
            assert!(conforms(&Architecture::with_instances(&cards, config), &m, &cards));
        }
        let unique = expand_unique(&model(BIPARTITE), &cards).unwrap();
        assert!(!conforms(&Architecture::with_instances(&cards, unique), &m, &cards));
    }

    #[test]
    fn limit_and_cap() {
        let m = model("T1.p[m=1,d=1] sync, T2.q[m=1,d=1] sync");
        let tiny = EnumerateOptions { node_limit: 2, max_solutions: None };
        assert!(matches!(enumerate_configurations(&m, &cards(4, 4), tiny), Err(DiagramError::LimitExceeded { .. })));
        let capped = EnumerateOptions { node_limit: DEFAULT_NODE_LIMIT, max_solutions: Some(2) };
        assert_eq!(enumerate_configurations(&m, &cards(4, 4), capped).unwrap().len(), 2);
        // 4x4 perfect matchings
        assert_eq!(enumerate_configurations(&m, &cards(4, 4), EnumerateOptions::default()).unwrap().len(), 24);
    }
}
