//! Scenario files: one spontaneous event per line, `CYCLE TYPE[index] EVENT`.

use serde::Serialize;

use crate::model::{InstanceId, SourceSpan};

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduledEvent {
    pub cycle: u64,
    pub instance: InstanceId,
    pub event: String,
    #[serde(skip)]
    pub span: SourceSpan,
}

/// Events delivered to components at given engine cycles, sorted by cycle.
/// Events sharing a cycle keep their file order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EventSchedule {
    pub events: Vec<ScheduledEvent>,
}

impl EventSchedule {
    pub fn new(mut events: Vec<ScheduledEvent>) -> Self {
        events.sort_by_key(|e| e.cycle);
        EventSchedule { events }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn due(&self, cycle: u64) -> impl Iterator<Item = &ScheduledEvent> {
        self.events.iter().filter(move |e| e.cycle == cycle)
    }

    pub fn has_after(&self, cycle: u64) -> bool {
        self.events.iter().any(|e| e.cycle > cycle)
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub(crate) fn parse(text: &str, file: &str) -> Result<EventSchedule, ParseError> {
    let mut events = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let span = SourceSpan::new(file, (lineno + 1, indent + 1), (lineno + 1, line.trim_end().len() + 1));
        let err = |msg: &str| ParseError::new(span.clone(), msg.to_string());
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [cycle, instance, event] = fields.as_slice() else {
            return Err(err("expected 'CYCLE TYPE[index] EVENT'"));
        };
        let cycle: u64 = cycle.parse().map_err(|_| err("expected a non-negative cycle number"))?;
        let (component, index) = instance
            .strip_suffix(']')
            .and_then(|s| s.split_once('['))
            .ok_or_else(|| err("expected an instance of the form TYPE[index]"))?;
        let index: u32 = index.parse().map_err(|_| err("expected a positive instance index"))?;
        if index == 0 || !is_name(component) {
            return Err(err("expected an instance of the form TYPE[index] with index >= 1"));
        }
        if !is_name(event) {
            return Err(err("expected an event name"));
        }
        events.push(ScheduledEvent {
            cycle,
            instance: InstanceId::new(component, index),
            event: event.to_string(),
            span,
        });
    }
    Ok(EventSchedule::new(events))
}
