//! Deterministic symbolic household simulator.
//!
//! States are values: every operation takes `&WorldState` and returns a new
//! state, so copies can be handed to worker threads freely.

mod action;
mod catalog;
mod rules;
mod scene;
mod state;
mod validate;

use thiserror::Error;

pub use action::{parse_action_text, split_plan_text, ActionStep, Verb};
pub use catalog::{
    Catalog, ClassId, Layout, ObjectClass, Property, PropertySet, SceneSize, SpawnRule, DEFAULT_CATALOG,
};
#[allow(unused_imports)]
pub(crate) use rules::apply_unchecked;
pub use rules::{
    apply_action, check_preconditions, enumerate_admissible_actions, is_executable, render_action_to_text, Violation,
};
pub use scene::sample_scene;
pub use state::{
    Agent, AgentId, ClassSnapshot, Flags, ObjectId, ObjectInstance, ObjectSnapshot, Posture, Relation, StateFlag,
    StateSnapshot, Support, WorldState, HAND_CAPACITY,
};
pub use validate::validate_state;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("unknown object {0}")]
    UnknownObject(ObjectId),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown verb `{0}`")]
    UnknownVerb(String),
    #[error("{verb} takes {expected} argument(s), got {got}")]
    Arity { verb: Verb, expected: usize, got: usize },
    #[error("step {} rejected: {}", .step.script(), join(.violations))]
    Rejected { step: ActionStep, violations: Vec<Violation> },
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
