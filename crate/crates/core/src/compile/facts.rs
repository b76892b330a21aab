//! Questions and answers read off experiences.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::explore::{agent_name, ExplorationTrace};
use crate::goals::{evaluate_predicate, Activity, PredicateKind, Term};
use crate::world::{apply_action, AgentId, ObjectId, Posture, Relation, Verb, WorldState};

/// A surface or container that ends a trace holding objects it did not hold
/// at the start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receiver {
    pub holder: ObjectId,
    pub relation: Relation,
    /// Final contents, in the order they were last placed.
    pub items: Vec<ObjectId>,
}

fn unique_class(state: &WorldState, obj: ObjectId) -> bool {
    state.instances_named(state.name_of(obj)).len() == 1
}

/// Receivers usable for counting questions: empty at the start, non-empty at
/// the end with a single relation, and the only instance of their class.
pub fn counting_receivers(trace: &ExplorationTrace) -> Vec<Receiver> {
    let start = &trace.initial_state;
    let occupied: BTreeSet<ObjectId> = start.objects().iter().filter_map(|o| o.support.map(|s| s.holder)).collect();
    let mut placed_at: BTreeMap<ObjectId, usize> = BTreeMap::new();
    let mut state = start.clone();
    for (i, step) in trace.steps.iter().enumerate() {
        if matches!(step.verb, Verb::Put | Verb::PutIn) {
            placed_at.insert(step.args[0], i);
        }
        state = apply_action(&state, step).expect("trace steps are executable");
    }
    let mut contents: BTreeMap<ObjectId, Vec<(usize, ObjectId, Relation)>> = BTreeMap::new();
    for o in state.objects() {
        if let Some(s) = o.support {
            if !occupied.contains(&s.holder) {
                let when = placed_at.get(&o.id).copied().unwrap_or(usize::MAX);
                contents.entry(s.holder).or_default().push((when, o.id, s.relation));
            }
        }
    }
    let mut out = Vec::new();
    for (holder, mut items) in contents {
        let relation = items[0].2;
        if items.iter().any(|i| i.2 != relation) || !unique_class(start, holder) {
            continue;
        }
        items.sort();
        out.push(Receiver { holder, relation, items: items.into_iter().map(|i| i.1).collect() });
    }
    out
}

/// Objects whose room path has at least two entries, whose class is unique
/// in the scene, and whose starting room is stated in the narrative: the
/// agent that first grabs it walked somewhere beforehand.
pub fn path_candidates(trace: &ExplorationTrace) -> Vec<(ObjectId, Vec<ObjectId>)> {
    let start = &trace.initial_state;
    trace
        .moved_objects()
        .filter(|(o, _)| unique_class(start, *o))
        .filter(|(o, _)| {
            let Some(first) = trace.steps.iter().position(|s| s.verb == Verb::Grab && s.args[0] == *o) else {
                return false;
            };
            let agent = trace.steps[first].agent;
            trace.steps[..first].iter().any(|s| s.agent == agent && matches!(s.verb, Verb::Walk | Verb::Run))
        })
        .map(|(o, p)| (o, p.to_vec()))
        .collect()
}

pub fn room_path_names(state: &WorldState, path: &[ObjectId]) -> Vec<String> {
    path.iter().map(|r| state.name_of(*r).to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocationQuestion {
    pub object: ObjectId,
    pub reference_room: ObjectId,
    /// `before` or `after`.
    pub preposition: String,
    pub answer: ObjectId,
}

/// Before/after questions about rooms that occur exactly once in `path`.
pub fn location_questions(object: ObjectId, path: &[ObjectId]) -> Vec<LocationQuestion> {
    let mut out = Vec::new();
    for (i, &room) in path.iter().enumerate() {
        if path.iter().filter(|&&r| r == room).count() != 1 {
            continue;
        }
        if i > 0 {
            out.push(LocationQuestion {
                object,
                reference_room: room,
                preposition: "before".into(),
                answer: path[i - 1],
            });
        }
        if i + 1 < path.len() {
            out.push(LocationQuestion {
                object,
                reference_room: room,
                preposition: "after".into(),
                answer: path[i + 1],
            });
        }
    }
    out
}

fn flag_word(kind: PredicateKind) -> Option<&'static str> {
    Some(match kind {
        PredicateKind::Open => "open",
        PredicateKind::Closed => "closed",
        PredicateKind::SwitchedOn => "on",
        PredicateKind::SwitchedOff => "off",
        PredicateKind::Clean => "clean",
        _ => return None,
    })
}

fn term_name(state: &WorldState, t: &Term) -> String {
    match t {
        Term::Class(c) => c.clone(),
        Term::Object(o) => state.name_of(*o).to_string(),
        Term::Agent(_) => String::new(),
    }
}

/// Describes `agent` and the activity-relevant facts of a final state, e.g.
/// `Tom is sitting on the sofa. Tom is facing the TV. The TV is on.`
pub fn inference_state_text(state: &WorldState, agent: AgentId, activity: &Activity) -> String {
    let who = agent_name(agent);
    let a = state.agent(agent).expect("agent exists");
    let mut out: Vec<String> = Vec::new();
    match a.posture {
        Posture::Standing => {}
        Posture::Sitting(o) => out.push(format!("{who} is sitting on the {}.", state.name_of(o))),
        Posture::Lying(o) => out.push(format!("{who} is lying on the {}.", state.name_of(o))),
        Posture::Sleeping(o) => out.push(format!("{who} is sleeping on the {}.", state.name_of(o))),
    }
    if let Some(f) = a.facing.filter(|f| !state.is_room(*f)) {
        out.push(format!("{who} is facing the {}.", state.name_of(f)));
    }
    for &h in &a.holding {
        out.push(format!("{who} is holding the {}.", state.name_of(h)));
    }
    for p in activity.goal.iter() {
        if !evaluate_predicate(state, p).unwrap_or(false) {
            continue;
        }
        let sentence = match p.kind {
            PredicateKind::On | PredicateKind::In => format!(
                "The {} is {} the {}.",
                term_name(state, &p.args[0]),
                if p.kind == PredicateKind::On { "on" } else { "in" },
                term_name(state, &p.args[1])
            ),
            kind => match flag_word(kind) {
                Some(w) => format!("The {} is {w}.", term_name(state, &p.args[0])),
                None => continue,
            },
        };
        out.push(sentence);
    }
    let mut seen = BTreeSet::new();
    out.retain(|s| seen.insert(s.clone()));
    out.join(" ")
}

/// Names of all non-room classes in the catalog, sorted.
pub(crate) fn item_classes(state: &WorldState) -> Vec<String> {
    let mut names: Vec<String> =
        state.catalog().classes().iter().filter(|c| !c.is_room()).map(|c| c.name.clone()).collect();
    names.sort();
    names.dedup();
    names
}

/// True if some step of the trace is neither movement nor object transport.
pub(crate) fn has_irrelevant_action(trace: &ExplorationTrace) -> bool {
    use crate::explore::ActionCategory;
    trace.steps.iter().any(|s| ActionCategory::of(s.verb) == Some(ActionCategory::Irrelevant))
}
