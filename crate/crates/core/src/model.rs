//! Domain types shared by every stage of the toolchain: component types with
//! their behaviour, connector motifs, port instances, connectors and
//! configurations, plus referential validation of assembled models.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Location of a node in a source document. Lines and columns are 1-based.
///
/// Spans are metadata: any two spans compare equal, so deriving equality on
/// model nodes yields structural equality.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl SourceSpan {
    pub fn new(file: &str, start: (usize, usize), end: (usize, usize)) -> Self {
        SourceSpan { file: file.to_string(), start_line: start.0, start_col: start.1, end_line: end.0, end_col: end.1 }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        SourceSpan {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

impl PartialEq for SourceSpan {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for SourceSpan {}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = if self.file.is_empty() { "<input>" } else { &self.file };
        write!(f, "{}:{}:{}", file, self.start_line, self.start_col)
    }
}

/// A name together with the span it was declared at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ident {
    pub name: String,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), span: SourceSpan::default() }
    }

    pub fn spanned(name: impl Into<String>, span: SourceSpan) -> Self {
        Ident { name: name.into(), span }
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("{kind} transition {from}->{to} must {expect}")]
    LabelMismatch { kind: TransitionKindTag, from: String, to: String, expect: &'static str },
    #[error("interaction must contain at least one port instance")]
    EmptyInteraction,
    #[error("connector node must have at least one child")]
    EmptyConnector,
    #[error("connector repeats port instance {0}")]
    RepeatedLeaf(PortInstance),
}

/// `T.p`: a port type of a component type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortTypeRef {
    pub component: String,
    pub port: String,
}

impl PortTypeRef {
    pub fn new(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortTypeRef { component: component.into(), port: port.into() }
    }

    pub fn instance(&self, index: u32) -> PortInstance {
        PortInstance::new(&self.component, index, &self.port)
    }
}

impl fmt::Display for PortTypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

impl Serialize for PortTypeRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Cardinality {
    Fixed(u32),
    /// Left as a named parameter, evaluated by a [`CardinalityAssignment`].
    Symbolic(String),
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Fixed(n) => write!(f, "{n}"),
            Cardinality::Symbolic(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionKindTag {
    Enforceable,
    Spontaneous,
    Internal,
}

impl fmt::Display for TransitionKindTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionKindTag::Enforceable => "enforceable",
            TransitionKindTag::Spontaneous => "spontaneous",
            TransitionKindTag::Internal => "internal",
        })
    }
}

/// The kind of an LTS transition together with its label, so that a label
/// can only exist where the kind allows one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "label", rename_all = "lowercase")]
pub enum TransitionKind {
    /// Engine-driven, labelled with a port.
    Enforceable(Ident),
    /// Environment-driven, labelled with an event.
    Spontaneous(Ident),
    Internal,
}

impl TransitionKind {
    pub fn tag(&self) -> TransitionKindTag {
        match self {
            TransitionKind::Enforceable(_) => TransitionKindTag::Enforceable,
            TransitionKind::Spontaneous(_) => TransitionKindTag::Spontaneous,
            TransitionKind::Internal => TransitionKindTag::Internal,
        }
    }

    pub fn label(&self) -> Option<&Ident> {
        match self {
            TransitionKind::Enforceable(l) | TransitionKind::Spontaneous(l) => Some(l),
            TransitionKind::Internal => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub source: Ident,
    pub destination: Ident,
    #[serde(flatten)]
    pub kind: TransitionKind,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl Transition {
    /// Builds a transition from an untyped (kind, label) pair, rejecting
    /// labelled internal transitions and unlabelled port/event transitions.
    pub fn new(
        source: &str,
        destination: &str,
        kind: TransitionKindTag,
        label: Option<&str>,
    ) -> Result<Self, ModelError> {
        let mismatch =
            |expect| ModelError::LabelMismatch { kind, from: source.to_string(), to: destination.to_string(), expect };
        let kind = match (kind, label) {
            (TransitionKindTag::Enforceable, Some(l)) => TransitionKind::Enforceable(Ident::new(l)),
            (TransitionKindTag::Spontaneous, Some(l)) => TransitionKind::Spontaneous(Ident::new(l)),
            (TransitionKindTag::Internal, None) => TransitionKind::Internal,
            (TransitionKindTag::Internal, Some(_)) => return Err(mismatch("not carry a label")),
            (_, None) => return Err(mismatch("carry a label")),
        };
        Ok(Transition {
            source: Ident::new(source),
            destination: Ident::new(destination),
            kind,
            span: SourceSpan::default(),
        })
    }

    /// Name used in diagnostics: the label, or `internal`.
    pub fn display_name(&self) -> &str {
        self.kind.label().map(|l| l.name.as_str()).unwrap_or("internal")
    }
}

/// Labelled transition system of a component type.
///
/// `initial` is a list so that models with zero or several initial
/// declarations can still be represented and reported on.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Lts {
    pub states: Vec<Ident>,
    pub initial: Vec<Ident>,
    pub transitions: Vec<Transition>,
}

impl Lts {
    pub fn has_state(&self, name: &str) -> bool {
        self.states.iter().any(|s| s.name == name)
    }

    /// The initial state when exactly one is declared.
    pub fn initial_state(&self) -> Option<&str> {
        match self.initial.as_slice() {
            [one] => Some(&one.name),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentType {
    pub name: Ident,
    pub cardinality: Cardinality,
    pub ports: Vec<Ident>,
    pub events: Vec<Ident>,
    pub lts: Lts,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl ComponentType {
    pub fn has_port(&self, port: &str) -> bool {
        self.ports.iter().any(|p| p.name == port)
    }

    pub fn has_event(&self, event: &str) -> bool {
        self.events.iter().any(|e| e.name == event)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Typing {
    Synchron,
    Trigger,
}

impl Typing {
    /// Suffix used when rendering connector leaves.
    pub fn marker(self) -> char {
        match self {
            Typing::Synchron => '*',
            Typing::Trigger => '!',
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Typing::Synchron => "sync",
            Typing::Trigger => "trigger",
        }
    }
}

/// One end of a connector motif: `T.p[m=M,d=D] sync|trigger`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MotifEnd {
    pub port: PortTypeRef,
    pub multiplicity: u32,
    pub degree: u32,
    pub typing: Typing,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl MotifEnd {
    pub fn new(port: PortTypeRef, multiplicity: u32, degree: u32, typing: Typing) -> Self {
        MotifEnd { port, multiplicity, degree, typing, span: SourceSpan::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConnectorMotif {
    pub id: Ident,
    pub ends: Vec<MotifEnd>,
    #[serde(skip)]
    pub span: SourceSpan,
}

impl ConnectorMotif {
    pub fn new(id: &str, ends: Vec<MotifEnd>) -> Self {
        ConnectorMotif { id: Ident::new(id), ends, span: SourceSpan::default() }
    }

    pub fn end(&self, port: &PortTypeRef) -> Option<&MotifEnd> {
        self.ends.iter().find(|e| &e.port == port)
    }

    pub fn has_trigger(&self) -> bool {
        self.ends.iter().any(|e| e.typing == Typing::Trigger)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagram {
    pub motifs: Vec<ConnectorMotif>,
    #[serde(skip)]
    pub span: SourceSpan,
}

/// Component types plus one architecture diagram over them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Model {
    pub components: Vec<ComponentType>,
    pub diagram: Diagram,
}

impl Model {
    pub fn component(&self, name: &str) -> Option<&ComponentType> {
        self.components.iter().find(|c| c.name.name == name)
    }

    /// Every port type mentioned by some motif, in canonical order.
    pub fn motif_port_types(&self) -> BTreeSet<PortTypeRef> {
        self.diagram.motifs.iter().flat_map(|m| m.ends.iter().map(|e| e.port.clone())).collect()
    }
}

/// An instantiated port `T[i].p`. Ordering is lexicographic on
/// (component type, instance index, port), which every set-valued output
/// of the toolchain follows.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PortInstance {
    pub component: String,
    pub index: u32,
    pub port: String,
}

impl PortInstance {
    pub fn new(component: &str, index: u32, port: &str) -> Self {
        PortInstance { component: component.to_string(), index, port: port.to_string() }
    }

    pub fn port_type(&self) -> PortTypeRef {
        PortTypeRef::new(&self.component, &self.port)
    }

    pub fn instance(&self) -> InstanceId {
        InstanceId { component: self.component.clone(), index: self.index }
    }
}

impl fmt::Display for PortInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}].{}", self.component, self.index, self.port)
    }
}

impl Serialize for PortInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A component instance `T[i]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId {
    pub component: String,
    pub index: u32,
}

impl InstanceId {
    pub fn new(component: &str, index: u32) -> Self {
        InstanceId { component: component.to_string(), index }
    }

    pub fn port(&self, port: &str) -> PortInstance {
        PortInstance::new(&self.component, self.index, port)
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.component, self.index)
    }
}

impl Serialize for InstanceId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A non-empty set of port instances that synchronise in one step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Interaction(BTreeSet<PortInstance>);

impl Interaction {
    pub fn new(ports: impl IntoIterator<Item = PortInstance>) -> Result<Self, ModelError> {
        let set: BTreeSet<_> = ports.into_iter().collect();
        if set.is_empty() {
            return Err(ModelError::EmptyInteraction);
        }
        Ok(Interaction(set))
    }

    pub fn singleton(port: PortInstance) -> Self {
        Interaction(BTreeSet::from([port]))
    }

    /// Union of two interactions; never empty since both inputs are not.
    pub fn union(&self, other: &Interaction) -> Interaction {
        Interaction(self.0.union(&other.0).cloned().collect())
    }

    pub fn ports(&self) -> &BTreeSet<PortInstance> {
        &self.0
    }

    pub fn contains(&self, port: &PortInstance) -> bool {
        self.0.contains(port)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &BTreeSet<PortInstance>) -> bool {
        self.0.is_subset(other)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PortInstance> {
        self.0.iter()
    }
}

impl fmt::Display for Interaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for p in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

pub type InteractionSet = BTreeSet<Interaction>;

/// Renders an interaction set one interaction per line.
pub fn render_interactions(set: &InteractionSet) -> String {
    set.iter().map(|a| format!("{a}\n")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectorPayload {
    Leaf(PortInstance),
    Children(Vec<ConnectorNode>),
}

/// A node of a (possibly hierarchical) connector tree. The typing of a node
/// matters to its parent; the root's typing is irrelevant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ConnectorNode {
    pub typing: Typing,
    pub payload: ConnectorPayload,
}

impl ConnectorNode {
    pub fn leaf(port: PortInstance, typing: Typing) -> Self {
        ConnectorNode { typing, payload: ConnectorPayload::Leaf(port) }
    }

    pub fn node(typing: Typing, children: Vec<ConnectorNode>) -> Result<Self, ModelError> {
        if children.is_empty() {
            return Err(ModelError::EmptyConnector);
        }
        let node = ConnectorNode { typing, payload: ConnectorPayload::Children(children) };
        let mut seen = BTreeSet::new();
        for leaf in node.leaves() {
            if !seen.insert(leaf.0.clone()) {
                return Err(ModelError::RepeatedLeaf(leaf.0.clone()));
            }
        }
        Ok(node)
    }

    /// Flat connector whose children are typed leaves, sorted canonically.
    pub fn flat(leaves: impl IntoIterator<Item = (PortInstance, Typing)>) -> Result<Self, ModelError> {
        let mut children: Vec<_> = leaves.into_iter().map(|(p, t)| ConnectorNode::leaf(p, t)).collect();
        children.sort();
        ConnectorNode::node(Typing::Synchron, children)
    }

    /// Leaves with their own typing, in tree order.
    pub fn leaves(&self) -> Vec<(&PortInstance, Typing)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<(&'a PortInstance, Typing)>) {
        match &self.payload {
            ConnectorPayload::Leaf(p) => out.push((p, self.typing)),
            ConnectorPayload::Children(cs) => cs.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn is_flat(&self) -> bool {
        match &self.payload {
            ConnectorPayload::Leaf(_) => true,
            ConnectorPayload::Children(cs) => cs.iter().all(|c| matches!(c.payload, ConnectorPayload::Leaf(_))),
        }
    }
}

impl fmt::Display for ConnectorNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            ConnectorPayload::Leaf(p) => write!(f, "{p}{}", self.typing.marker()),
            ConnectorPayload::Children(cs) if self.is_flat() => {
                let parts: Vec<_> = cs.iter().map(|c| c.to_string()).collect();
                f.write_str(&parts.join(" "))
            }
            ConnectorPayload::Children(cs) => {
                let parts: Vec<_> = cs
                    .iter()
                    .map(|c| match c.payload {
                        ConnectorPayload::Leaf(_) => c.to_string(),
                        ConnectorPayload::Children(_) => format!("[{c}]{}", c.typing.marker()),
                    })
                    .collect();
                f.write_str(&parts.join(" "))
            }
        }
    }
}

/// A connector tagged with the motif that produced it. Connectors with the
/// same leaves but different motifs are distinct.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Connector {
    pub motif: String,
    pub root: ConnectorNode,
}

impl fmt::Display for Connector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.motif, self.root)
    }
}

/// A set of connectors kept in canonical order.
///
/// Stored as a sorted vector rather than a set so that architectures
/// carrying a repeated connector can still be represented and rejected by
/// conformance checking.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Configuration {
    connectors: Vec<Connector>,
}

impl Configuration {
    pub fn new(connectors: impl IntoIterator<Item = Connector>) -> Self {
        let mut connectors: Vec<_> = connectors.into_iter().collect();
        connectors.sort();
        Configuration { connectors }
    }

    pub fn connectors(&self) -> &[Connector] {
        &self.connectors
    }

    pub fn len(&self) -> usize {
        self.connectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.connectors.is_empty()
    }

    /// Same connectors ignoring motif provenance, as a set of leaf sets.
    pub fn leaf_sets(&self) -> BTreeSet<BTreeSet<PortInstance>> {
        self.connectors.iter().map(|c| c.root.leaves().into_iter().map(|(p, _)| p.clone()).collect()).collect()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.connectors {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Resolved number of instances per component type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CardinalityAssignment(BTreeMap<String, u32>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardinalityError {
    #[error("no cardinality given for component type [{component}] (symbolic '{symbol}')")]
    Missing { component: String, symbol: String },
    #[error("cardinality of component type [{0}] must be at least 1")]
    Zero(String),
}

impl CardinalityAssignment {
    pub fn new(entries: impl IntoIterator<Item = (String, u32)>) -> Self {
        CardinalityAssignment(entries.into_iter().collect())
    }

    /// Evaluates every component type's cardinality. Per-type `overrides`
    /// win over declared values; `params` bind symbolic cardinality names.
    pub fn resolve(
        model: &Model,
        overrides: &BTreeMap<String, u32>,
        params: &BTreeMap<String, u32>,
    ) -> Result<Self, CardinalityError> {
        let mut out = BTreeMap::new();
        for c in &model.components {
            let name = &c.name.name;
            let n = match (overrides.get(name), &c.cardinality) {
                (Some(&n), _) => n,
                (None, Cardinality::Fixed(n)) => *n,
                (None, Cardinality::Symbolic(s)) => match params.get(s) {
                    Some(&n) => n,
                    None => return Err(CardinalityError::Missing { component: name.clone(), symbol: s.clone() }),
                },
            };
            if n == 0 {
                return Err(CardinalityError::Zero(name.clone()));
            }
            out.insert(name.clone(), n);
        }
        Ok(CardinalityAssignment(out))
    }

    pub fn get(&self, component: &str) -> Option<u32> {
        self.0.get(component).copied()
    }

    pub fn of(&self, component: &str) -> u32 {
        self.get(component).unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u32)> {
        self.0.iter()
    }

    /// All instances of all assigned component types, canonically ordered.
    pub fn instances(&self) -> Vec<InstanceId> {
        self.0.iter().flat_map(|(c, &n)| (1..=n).map(move |i| InstanceId::new(c, i))).collect()
    }

    pub fn port_instances(&self, port: &PortTypeRef) -> Vec<PortInstance> {
        (1..=self.of(&port.component)).map(|i| port.instance(i)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

/// A finding about a model, pointing at the offending node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    /// Logical path of the node, e.g. `diagram/motif[star]/end[C.p]`.
    pub node: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: String, node: String, span: &SourceSpan) -> Self {
        Diagnostic { severity: Severity::Error, code, message, node, span: span.clone() }
    }

    pub fn warning(code: &'static str, message: String, node: String, span: &SourceSpan) -> Self {
        Diagnostic { severity: Severity::Warning, code, message, node, span: span.clone() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.severity, self.code, self.span, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Checks that every name resolves, names are unique, cardinalities are
/// legal and port/event sets are disjoint. An empty result means the model
/// is referentially sound.
pub fn validate_references(model: &Model) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen_components = BTreeSet::new();

    for c in &model.components {
        let cname = &c.name.name;
        let path = format!("component[{cname}]");
        if !seen_components.insert(cname.as_str()) {
            diags.push(Diagnostic::error(
                "DUPLICATE_COMPONENT",
                format!("Component type [{cname}] is declared more than once."),
                path.clone(),
                &c.name.span,
            ));
        }
        if c.cardinality == Cardinality::Fixed(0) {
            diags.push(Diagnostic::error(
                "INVALID_CARDINALITY",
                format!("Component type [{cname}] has cardinality 0. Cardinality must be at least 1."),
                path.clone(),
                &c.span,
            ));
        }
        if c.ports.is_empty() {
            diags.push(Diagnostic::error(
                "NO_PORTS",
                format!("Component type [{cname}] declares no ports."),
                path.clone(),
                &c.span,
            ));
        }
        let mut names = BTreeSet::new();
        for p in &c.ports {
            if !names.insert(p.name.as_str()) {
                diags.push(Diagnostic::error(
                    "DUPLICATE_PORT",
                    format!("Port [{}] is declared more than once in component type [{cname}].", p.name),
                    format!("{path}/port[{}]", p.name),
                    &p.span,
                ));
            }
        }
        let mut event_names = BTreeSet::new();
        for e in &c.events {
            if !event_names.insert(e.name.as_str()) {
                diags.push(Diagnostic::error(
                    "DUPLICATE_EVENT",
                    format!("Event [{}] is declared more than once in component type [{cname}].", e.name),
                    format!("{path}/event[{}]", e.name),
                    &e.span,
                ));
            } else if names.contains(e.name.as_str()) {
                diags.push(Diagnostic::error(
                    "PORT_EVENT_OVERLAP",
                    format!("[{}] is declared both as a port and as an event of component type [{cname}].", e.name),
                    format!("{path}/event[{}]", e.name),
                    &e.span,
                ));
            }
        }
        let mut state_names = BTreeSet::new();
        for s in &c.lts.states {
            if !state_names.insert(s.name.as_str()) {
                diags.push(Diagnostic::error(
                    "DUPLICATE_STATE",
                    format!("State [{}] is declared more than once in component type [{cname}].", s.name),
                    format!("{path}/state[{}]", s.name),
                    &s.span,
                ));
            }
        }
    }

    let mut seen_motifs = BTreeSet::new();
    for m in &model.diagram.motifs {
        let mid = &m.id.name;
        let path = format!("diagram/motif[{mid}]");
        if !seen_motifs.insert(mid.as_str()) {
            diags.push(Diagnostic::error(
                "DUPLICATE_MOTIF",
                format!("Connector motif [{mid}] is declared more than once."),
                path.clone(),
                &m.id.span,
            ));
        }
        if m.ends.is_empty() {
            diags.push(Diagnostic::error(
                "EMPTY_MOTIF",
                format!("Connector motif [{mid}] has no ends."),
                path.clone(),
                &m.span,
            ));
        }
        let mut ends = BTreeSet::new();
        for e in &m.ends {
            let epath = format!("{path}/end[{}]", e.port);
            let resolved = model.component(&e.port.component).is_some_and(|c| c.has_port(&e.port.port));
            if !resolved {
                diags.push(Diagnostic::error(
                    "UNRESOLVED_PORT",
                    format!("Connector motif [{mid}] references undeclared port type [{}].", e.port),
                    epath.clone(),
                    &e.span,
                ));
            }
            if !ends.insert(&e.port) {
                diags.push(Diagnostic::error(
                    "DUPLICATE_END",
                    format!("Connector motif [{mid}] lists port type [{}] more than once.", e.port),
                    epath.clone(),
                    &e.span,
                ));
            }
            if e.multiplicity == 0 {
                diags.push(Diagnostic::error(
                    "INVALID_MULTIPLICITY",
                    format!("Port type [{}] in connector motif [{mid}] has multiplicity 0.", e.port),
                    epath.clone(),
                    &e.span,
                ));
            }
            if e.degree == 0 {
                diags.push(Diagnostic::warning(
                    "ZERO_DEGREE",
                    format!(
                        "Port type [{}] in connector motif [{mid}] has degree 0; its instances take part in no connector.",
                        e.port
                    ),
                    epath,
                    &e.span,
                ));
            }
        }
    }
    diags
}

#[cfg(test)]
mod tests {
    use super::*;

    fn component(name: &str, ports: &[&str]) -> ComponentType {
        ComponentType {
            name: Ident::new(name),
            cardinality: Cardinality::Fixed(1),
            ports: ports.iter().map(|p| Ident::new(*p)).collect(),
            events: vec![],
            lts: Lts { states: vec![Ident::new("s0")], initial: vec![Ident::new("s0")], transitions: vec![] },
            span: SourceSpan::default(),
        }
    }

    #[test]
    fn internal_transition_with_label_is_rejected() {
        let err = Transition::new("a", "b", TransitionKindTag::Internal, Some("x")).unwrap_err();
        assert!(matches!(err, ModelError::LabelMismatch { .. }));
        assert!(Transition::new("a", "b", TransitionKindTag::Enforceable, None).is_err());
        assert!(Transition::new("a", "b", TransitionKindTag::Internal, None).is_ok());
    }

    #[test]
    fn unresolved_motif_end() {
        let model = Model {
            components: vec![component("T1", &["p"])],
            diagram: Diagram {
                motifs: vec![ConnectorMotif::new(
                    "m",
                    vec![MotifEnd::new(PortTypeRef::new("T1", "z"), 1, 1, Typing::Synchron)],
                )],
                span: SourceSpan::default(),
            },
        };
        let diags = validate_references(&model);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "UNRESOLVED_PORT");
        assert!(diags[0].message.contains("[m]") && diags[0].message.contains("T1.z"));
    }

    #[test]
    fn duplicate_component_names() {
        let model = Model {
            components: vec![component("Route", &["on"]), component("Route", &["off"])],
            diagram: Diagram::default(),
        };
        let diags = validate_references(&model);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "DUPLICATE_COMPONENT");
    }

    #[test]
    fn zero_degree_is_only_a_warning() {
        let model = Model {
            components: vec![component("T", &["p"])],
            diagram: Diagram {
                motifs: vec![ConnectorMotif::new(
                    "m",
                    vec![MotifEnd::new(PortTypeRef::new("T", "p"), 1, 0, Typing::Synchron)],
                )],
                span: SourceSpan::default(),
            },
        };
        let diags = validate_references(&model);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
    }

    #[test]
    fn port_instance_order_is_lexicographic() {
        let mut v = [
            PortInstance::new("S", 2, "q"),
            PortInstance::new("C", 1, "p"),
            PortInstance::new("S", 1, "r"),
            PortInstance::new("S", 1, "q"),
        ];
        v.sort();
        let s: Vec<_> = v.iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["C[1].p", "S[1].q", "S[1].r", "S[2].q"]);
    }

    #[test]
    fn symbolic_cardinality_needs_a_binding() {
        let mut c = component("P", &["a"]);
        c.cardinality = Cardinality::Symbolic("n".into());
        let model = Model { components: vec![c], diagram: Diagram::default() };
        let none = BTreeMap::new();
        assert!(matches!(CardinalityAssignment::resolve(&model, &none, &none), Err(CardinalityError::Missing { .. })));
        let params = BTreeMap::from([("n".to_string(), 3)]);
        let cards = CardinalityAssignment::resolve(&model, &none, &params).unwrap();
        assert_eq!(cards.of("P"), 3);
    }

    #[test]
    fn empty_interaction_rejected() {
        assert_eq!(Interaction::new(vec![]).unwrap_err(), ModelError::EmptyInteraction);
    }
}
