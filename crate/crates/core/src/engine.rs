//! Cyclic coordination engine.
//!
//! Each cycle delivers the scenario's due events, collects the ports enabled
//! by every instance's current state, picks one glue interaction whose ports
//! are all enabled, fires the matching transitions and then lets internal
//! transitions run to quiescence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::behavior::check_behavior;
use crate::diagram::{expand_unique, DiagramError};
use crate::dsl::{serialize_model, EventSchedule};
use crate::interaction::interactions_of_configuration;
use crate::macros::{encode_macros, interactions_from_macros, MacroError, MacroMode};
use crate::model::{
    has_errors, CardinalityAssignment, ComponentType, Diagnostic, InstanceId, Interaction, InteractionSet, Model,
    PortInstance, TransitionKind,
};
use crate::pil::DEFAULT_UNIVERSE_BOUND;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("model has behavioural errors")]
    BehaviorInvalid(Vec<Diagnostic>),
    #[error("no cardinality for component type [{0}]")]
    MissingCardinality(String),
    #[error("scenario event '{event}' for {instance} does not match a declared instance and event")]
    UnknownEvent { instance: InstanceId, event: String },
    #[error("internal transitions of {instance} did not settle within {bound} steps")]
    InternalLivelock { instance: InstanceId, bound: usize },
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Macro(#[from] MacroError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Uniformly random among executable interactions.
    #[default]
    Uniform,
    /// The first executable interaction in canonical order.
    First,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Uniform => "uniform",
            Policy::First => "first",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GlueSource {
    /// Interactions of the diagram's unique configuration.
    #[default]
    Diagram,
    /// Interactions admitted by the Require/Accept encoding.
    Macros,
}

impl fmt::Display for GlueSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GlueSource::Diagram => "diagram",
            GlueSource::Macros => "macros",
        })
    }
}

/// The interaction set the engine coordinates with.
pub fn glue_interactions(
    model: &Model,
    cards: &CardinalityAssignment,
    source: GlueSource,
) -> Result<InteractionSet, EngineError> {
    Ok(match source {
        GlueSource::Diagram => interactions_of_configuration(&expand_unique(model, cards)?),
        GlueSource::Macros => {
            interactions_from_macros(&encode_macros(model), cards, DEFAULT_UNIVERSE_BOUND, MacroMode::Scoped)?
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpontaneousStep {
    pub instance: InstanceId,
    pub event: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiredStep {
    pub port: PortInstance,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InternalStep {
    pub instance: InstanceId,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DroppedEvent {
    pub instance: InstanceId,
    pub event: String,
    pub state: String,
}

impl fmt::Display for DroppedEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "event '{}' for {} dropped: no matching transition from state [{}]",
            self.event, self.instance, self.state
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub enabled: BTreeSet<PortInstance>,
    pub spontaneous: Vec<SpontaneousStep>,
    pub interaction: Option<Interaction>,
    pub fired: Vec<FiredStep>,
    pub internal: Vec<InternalStep>,
    pub states: BTreeMap<InstanceId, String>,
    /// Scheduled events that found no enabled transition. Reported as
    /// warnings, not written to trace files.
    #[serde(skip)]
    pub dropped: Vec<DroppedEvent>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Terminal {
    /// The cycle budget ran out.
    Completed,
    /// Nothing can fire and no events were ever scheduled.
    Deadlock,
    /// Nothing can fire after the whole scenario has been delivered.
    EventExhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceHeader {
    pub model: String,
    pub cards: CardinalityAssignment,
    pub seed: u64,
    pub policy: Policy,
    pub glue: GlueSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<CycleRecord>,
    pub terminal: Terminal,
}

impl Trace {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serialises");
        s.push('\n');
        s
    }
}

/// SHA-256 of the model's canonical text.
pub fn model_hash(model: &Model) -> String {
    let digest = Sha256::digest(serialize_model(model).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-instance current state plus the cycle counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemState {
    pub cycle: u64,
    pub states: BTreeMap<InstanceId, String>,
}

pub fn init_system(model: &Model, cards: &CardinalityAssignment) -> Result<SystemState, EngineError> {
    let diags = check_behavior(model);
    if has_errors(&diags) {
        return Err(EngineError::BehaviorInvalid(diags));
    }
    let mut states = BTreeMap::new();
    for c in &model.components {
        let n = cards.get(&c.name.name).ok_or_else(|| EngineError::MissingCardinality(c.name.name.clone()))?;
        let initial = c.lts.initial_state().expect("behaviour check guarantees one initial state");
        for i in 1..=n {
            states.insert(InstanceId::new(&c.name.name, i), initial.to_string());
        }
    }
    Ok(SystemState { cycle: 0, states })
}

/// A model prepared for execution.
pub struct System<'m> {
    model: &'m Model,
    components: BTreeMap<&'m str, &'m ComponentType>,
    pub state: SystemState,
}

impl<'m> System<'m> {
    pub fn new(model: &'m Model, cards: &CardinalityAssignment) -> Result<Self, EngineError> {
        let state = init_system(model, cards)?;
        let components = model.components.iter().map(|c| (c.name.name.as_str(), c)).collect();
        Ok(System { model, components, state })
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Rejects scenario events naming unknown instances or events.
    pub fn check_schedule(&self, schedule: &EventSchedule) -> Result<(), EngineError> {
        for e in &schedule.events {
            let known = self.state.states.contains_key(&e.instance)
                && self.components[e.instance.component.as_str()].has_event(&e.event);
            if !known {
                return Err(EngineError::UnknownEvent { instance: e.instance.clone(), event: e.event.clone() });
            }
        }
        Ok(())
    }

    fn component(&self, instance: &InstanceId) -> &'m ComponentType {
        self.components[instance.component.as_str()]
    }

    pub fn enabled_ports(&self) -> BTreeSet<PortInstance> {
        let mut out = BTreeSet::new();
        for (inst, state) in &self.state.states {
            for t in &self.component(inst).lts.transitions {
                if let TransitionKind::Enforceable(port) = &t.kind {
                    if t.source.name == *state {
                        out.insert(inst.port(&port.name));
                    }
                }
            }
        }
        out
    }

    /// Glue interactions whose ports are all enabled, involving at most one
    /// port per instance.
    pub fn executable<'g>(&self, glue: &'g InteractionSet, enabled: &BTreeSet<PortInstance>) -> Vec<&'g Interaction> {
        glue.iter()
            .filter(|a| a.is_subset(enabled))
            .filter(|a| {
                let instances: BTreeSet<_> = a.iter().map(|p| p.instance()).collect();
                instances.len() == a.len()
            })
            .collect()
    }

    pub fn step(
        &mut self,
        glue: &InteractionSet,
        policy: Policy,
        rng: &mut Xoshiro256StarStar,
        schedule: &EventSchedule,
    ) -> Result<CycleRecord, EngineError> {
        let cycle = self.state.cycle;
        let mut spontaneous = Vec::new();
        let mut dropped = Vec::new();
        for ev in schedule.due(cycle) {
            let Some(current) = self.state.states.get(&ev.instance).cloned() else {
                return Err(EngineError::UnknownEvent { instance: ev.instance.clone(), event: ev.event.clone() });
            };
            let transition = self.component(&ev.instance).lts.transitions.iter().find(|t| {
                t.source.name == current && matches!(&t.kind, TransitionKind::Spontaneous(e) if e.name == ev.event)
            });
            match transition {
                Some(t) => {
                    let to = t.destination.name.clone();
                    self.state.states.insert(ev.instance.clone(), to.clone());
                    spontaneous.push(SpontaneousStep {
                        instance: ev.instance.clone(),
                        event: ev.event.clone(),
                        from: current,
                        to,
                    });
                }
                None => dropped.push(DroppedEvent {
                    instance: ev.instance.clone(),
                    event: ev.event.clone(),
                    state: current,
                }),
            }
        }

        let enabled = self.enabled_ports();
        let executable = self.executable(glue, &enabled);
        let chosen = match (executable.len(), policy) {
            (0, _) => None,
            (_, Policy::First) => Some(executable[0].clone()),
            (n, Policy::Uniform) => Some(executable[rng.gen_range(0..n)].clone()),
        };

        let mut fired = Vec::new();
        if let Some(interaction) = &chosen {
            for port in interaction.iter() {
                let inst = port.instance();
                let current = self.state.states[&inst].clone();
                let t = self
                    .component(&inst)
                    .lts
                    .transitions
                    .iter()
                    .find(|t| {
                        t.source.name == current
                            && matches!(&t.kind, TransitionKind::Enforceable(p) if p.name == port.port)
                    })
                    .expect("executable interactions only contain enabled ports");
                let to = t.destination.name.clone();
                self.state.states.insert(inst, to.clone());
                fired.push(FiredStep { port: port.clone(), from: current, to });
            }
        }

        let mut internal = Vec::new();
        let instances: Vec<InstanceId> = self.state.states.keys().cloned().collect();
        for inst in instances {
            let component = self.component(&inst);
            let bound = component.lts.states.len();
            let mut steps = 0;
            loop {
                let current = self.state.states[&inst].clone();
                let Some(t) = component
                    .lts
                    .transitions
                    .iter()
                    .find(|t| t.source.name == current && t.kind == TransitionKind::Internal)
                else {
                    break;
                };
                if steps >= bound {
                    return Err(EngineError::InternalLivelock { instance: inst, bound });
                }
                steps += 1;
                let to = t.destination.name.clone();
                self.state.states.insert(inst.clone(), to.clone());
                internal.push(InternalStep { instance: inst.clone(), from: current, to });
            }
        }

        self.state.cycle += 1;
        Ok(CycleRecord {
            cycle,
            enabled,
            spontaneous,
            interaction: chosen,
            fired,
            internal,
            states: self.state.states.clone(),
            dropped,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub max_cycles: u64,
    pub policy: Policy,
    pub glue: GlueSource,
}

/// Runs the engine until it gets stuck or `max_cycles` cycles have run.
pub fn run(
    model: &Model,
    cards: &CardinalityAssignment,
    config: RunConfig,
    schedule: &EventSchedule,
) -> Result<Trace, EngineError> {
    let mut system = System::new(model, cards)?;
    system.check_schedule(schedule)?;
    let glue = glue_interactions(model, cards, config.glue)?;
    let mut rng = Xoshiro256StarStar::seed_from_u64(config.seed);

    let mut records = Vec::new();
    let mut terminal = Terminal::Completed;
    for cycle in 0..config.max_cycles {
        let record = system.step(&glue, config.policy, &mut rng, schedule)?;
        let stuck = record.interaction.is_none() && record.internal.is_empty() && !schedule.has_after(cycle);
        records.push(record);
        if stuck {
            terminal = if schedule.is_empty() { Terminal::Deadlock } else { Terminal::EventExhausted };
            break;
        }
    }
    Ok(Trace {
        header: TraceHeader {
            model: model_hash(model),
            cards: cards.clone(),
            seed: config.seed,
            policy: config.policy,
            glue: config.glue,
        },
        records,
        terminal,
    })
}
