//! Textual model language, scenario files and the bundled pattern library.
//!
//! ```text
//! component C (n=1) { ports p  states s0 initial s0  s0 -> s0 on p }
//! component S (n=3) { ports q  states s0 initial s0  s0 -> s0 on q }
//! diagram { motif star { C.p[m=1,d=3] sync, S.q[m=1,d=1] sync } }
//! ```

mod lexer;
mod parser;
mod printer;
mod scenario;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Model, SourceSpan};

pub use scenario::{EventSchedule, ScheduledEvent};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(span: SourceSpan, message: String) -> Self {
        ParseError { span, message }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Parses a model document. `file` is only used for spans.
pub fn parse_model(text: &str, file: &str) -> Result<Model, ParseError> {
    parser::parse(text, file)
}

/// Canonical text for a model; re-parsing it yields a structurally equal model.
pub fn serialize_model(model: &Model) -> String {
    printer::print(model)
}

pub fn load_scenario(text: &str, file: &str) -> Result<EventSchedule, ParseError> {
    scenario::parse(text, file)
}

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("unknown pattern '{0}' (available: {})", PATTERNS.iter().map(|p| p.0).collect::<Vec<_>>().join(", "))]
    UnknownPattern(String),
    #[error("missing value for parameter '{0}'")]
    MissingParameter(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

const PATTERNS: &[(&str, &str)] =
    &[("mutex", include_str!("../../patterns/mutex.bip")), ("star", include_str!("../../patterns/star.bip"))];

pub fn pattern_names() -> impl Iterator<Item = &'static str> {
    PATTERNS.iter().map(|p| p.0)
}

/// Raw template text of a bundled pattern, with `$name` placeholders.
pub fn pattern_source(name: &str) -> Option<&'static str> {
    PATTERNS.iter().find(|p| p.0 == name).map(|p| p.1)
}

/// Replaces every `$name` placeholder with its bound value. Placeholders in
/// comments are left alone.
pub fn substitute_params(text: &str, params: &BTreeMap<String, u32>) -> Result<String, PatternError> {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let (code, comment) = match line.find('#') {
            Some(at) => line.split_at(at),
            None => (line, ""),
        };
        let mut rest = code;
        while let Some(at) = rest.find('$') {
            out.push_str(&rest[..at]);
            let after = &rest[at + 1..];
            let len = after
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
                .map(|(i, _)| i)
                .unwrap_or(after.len());
            let name = &after[..len];
            match params.get(name) {
                Some(v) => out.push_str(&v.to_string()),
                // leave unknown or empty names for the lexer to report
                None if name.is_empty() => out.push('$'),
                None => return Err(PatternError::MissingParameter(name.to_string())),
            }
            rest = &after[len..];
        }
        out.push_str(rest);
        out.push_str(comment);
    }
    Ok(out)
}

/// Instantiates a bundled pattern with its parameters evaluated.
pub fn load_pattern(name: &str, params: &BTreeMap<String, u32>) -> Result<Model, PatternError> {
    let source = pattern_source(name).ok_or_else(|| PatternError::UnknownPattern(name.to_string()))?;
    let text = substitute_params(source, params)?;
    Ok(parse_model(&text, &format!("<pattern:{name}>"))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cardinality, PortTypeRef, TransitionKind, Typing};

    const STAR: &str = "component C (n=1) { ports p  states s0 initial s0  s0 -> s0 on p }
component S (n=3) { ports q  states s0 initial s0  s0 -> s0 on q }
diagram { motif star { C.p[m=1,d=3] sync, S.q[m=1,d=1] sync } }
";

    fn params(n: u32) -> BTreeMap<String, u32> {
        BTreeMap::from([("n".to_string(), n)])
    }

    #[test]
    fn parses_star() {
        let m = parse_model(STAR, "star.bip").unwrap();
        assert_eq!(m.components.len(), 2);
        assert_eq!(m.diagram.motifs.len(), 1);
        let end = &m.diagram.motifs[0].ends[0];
        assert_eq!(end.port, PortTypeRef::new("C", "p"));
        assert_eq!((end.multiplicity, end.degree, end.typing), (1, 3, Typing::Synchron));
        assert_eq!(m.components[1].cardinality, Cardinality::Fixed(3));
        assert_eq!(end.span.start_line, 3);
        assert_eq!(m.components[1].name.span.start_line, 2);
    }

    #[test]
    fn zero_multiplicity_is_a_parse_error() {
        let text = STAR.replace("C.p[m=1", "C.p[m=0");
        let err = parse_model(&text, "f").unwrap_err();
        assert!(err.message.contains("multiplicity"), "{err}");
        assert_eq!(err.span.start_line, 3);
    }

    #[test]
    fn empty_file() {
        let err = parse_model("", "f").unwrap_err();
        assert!(err.message.starts_with("expected 'component'"), "{err}");
        let err = parse_model("  # nothing\n", "f").unwrap_err();
        assert!(err.message.starts_with("expected 'component'"), "{err}");
    }

    #[test]
    fn error_reports_expected_token() {
        let err = parse_model("component C (n=1) { ports p states s0 s0 -> s0 }", "f").unwrap_err();
        assert!(err.message.contains("'on', 'when' or 'internal'"), "{err}");
        let err = parse_model("component C n=1", "f").unwrap_err();
        assert!(err.message.contains("'('"), "{err}");
    }

    #[test]
    fn star_round_trips_through_canonical_text() {
        let m = parse_model(STAR, "f").unwrap();
        let text = serialize_model(&m);
        assert_eq!(parse_model(&text, "g").unwrap(), m);
        assert_eq!(serialize_model(&parse_model(&text, "g").unwrap()), text);
    }

    #[test]
    fn symbolic_cardinality_is_preserved() {
        let m = parse_model(&STAR.replace("(n=3)", "(n=n)"), "f").unwrap();
        assert_eq!(m.components[1].cardinality, Cardinality::Symbolic("n".into()));
        let text = serialize_model(&m);
        assert!(text.contains("component S (n=n)"));
        assert_eq!(parse_model(&text, "f").unwrap(), m);
    }

    #[test]
    fn transition_kinds_and_optional_initial() {
        let src = "component R (n=2) {
  ports on, off
  events finished
  states idle, busy
  idle -> busy on on
  busy -> idle when finished
  busy -> busy internal
}
diagram { }";
        let m = parse_model(src, "f").unwrap();
        let c = &m.components[0];
        assert!(c.lts.initial.is_empty());
        assert!(matches!(&c.lts.transitions[0].kind, TransitionKind::Enforceable(p) if p.name == "on"));
        assert!(matches!(&c.lts.transitions[1].kind, TransitionKind::Spontaneous(e) if e.name == "finished"));
        assert_eq!(c.lts.transitions[2].kind, TransitionKind::Internal);
        assert_eq!(parse_model(&serialize_model(&m), "f").unwrap(), m);
    }

    #[test]
    fn scenario_lines() {
        let s = load_scenario("3 Route[2] finished\n", "s").unwrap();
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.events[0].cycle, 3);
        assert_eq!(s.events[0].instance.to_string(), "Route[2]");
        assert!(load_scenario("", "s").unwrap().is_empty());
        let s = load_scenario("5 A[1] x\n# c\n\n1 B[1] y\n5 A[2] z\n", "s").unwrap();
        let order: Vec<_> = s.events.iter().map(|e| (e.cycle, e.event.as_str())).collect();
        assert_eq!(order, [(1, "y"), (5, "x"), (5, "z")]);
        let err = load_scenario("1 A[0] x\n2 broken\n", "s").unwrap_err();
        assert_eq!(err.span.start_line, 1);
        assert!(load_scenario("x A[1] e", "s").is_err());
    }

    #[test]
    fn mutex_pattern_shape() {
        let m = load_pattern("mutex", &params(2)).unwrap();
        let process = m.component("Process").unwrap();
        let manager = m.component("MutexManager").unwrap();
        assert_eq!(process.cardinality, Cardinality::Fixed(2));
        assert_eq!(manager.cardinality, Cardinality::Fixed(1));
        assert_eq!(m.diagram.motifs.len(), 2);
        for motif in &m.diagram.motifs {
            assert_eq!(motif.ends.len(), 2);
            for end in &motif.ends {
                assert_eq!(end.multiplicity, 1);
                let expected = if end.port.component == "Process" { 1 } else { 2 };
                assert_eq!(end.degree, expected);
            }
        }
    }

    #[test]
    fn star_pattern_matches_canonical_star() {
        let m = load_pattern("star", &params(3)).unwrap();
        assert_eq!(m, parse_model(STAR, "f").unwrap());
    }

    #[test]
    fn pattern_errors() {
        assert!(matches!(
            load_pattern("mutex", &BTreeMap::new()),
            Err(PatternError::MissingParameter(p)) if p == "n"
        ));
        assert!(matches!(load_pattern("ring", &params(2)), Err(PatternError::UnknownPattern(_))));
    }
}
