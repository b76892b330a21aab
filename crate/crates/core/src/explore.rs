//! Multi-agent random exploration and its narrative rendering.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{
    apply_action, enumerate_admissible_actions, ActionStep, AgentId, ObjectId, Property, Verb, WorldError, WorldState,
};

/// Display names for agents, by agent id.
pub const AGENT_NAMES: [&str; 8] = ["Tom", "Mary", "John", "Lisa", "Jack", "Emma", "Sam", "Anna"];

/// Past-tense motion verbs used for walking.
pub const MOTION_VERBS: [&str; 5] = ["walked", "went", "travelled", "moved", "journeyed"];

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("n_agents must be at least 1")]
    NoAgents,
    #[error("n_steps must be at least 1")]
    NoSteps,
    #[error("cannot place {0} agents (at most {max})", max = AGENT_NAMES.len())]
    TooManyAgents(usize),
    #[error("{0} has no admissible action")]
    Stuck(AgentId),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Coarse action categories the exploration policy weighs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionCategory {
    Walk,
    Grab,
    Place,
    Drop,
    Irrelevant,
}

impl ActionCategory {
    pub const ALL: [ActionCategory; 5] = [
        ActionCategory::Walk,
        ActionCategory::Grab,
        ActionCategory::Place,
        ActionCategory::Drop,
        ActionCategory::Irrelevant,
    ];

    /// Category of a verb; `None` for verbs exploration never samples.
    pub fn of(verb: Verb) -> Option<ActionCategory> {
        Some(match verb {
            // Find relocates the agent without naming a room, which the
            // narrative cannot express.
            Verb::Find => return None,
            Verb::Walk | Verb::Run => ActionCategory::Walk,
            Verb::Grab => ActionCategory::Grab,
            Verb::Put | Verb::PutIn => ActionCategory::Place,
            Verb::Drop => ActionCategory::Drop,
            _ => ActionCategory::Irrelevant,
        })
    }
}

/// Relative weights of each category. Categories with no admissible action
/// in the current state are skipped and the rest renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyBias {
    pub walk: f64,
    pub grab: f64,
    pub place: f64,
    pub drop: f64,
    pub irrelevant: f64,
}

impl Default for PolicyBias {
    fn default() -> Self {
        PolicyBias { walk: 0.3, grab: 0.25, place: 0.2, drop: 0.05, irrelevant: 0.2 }
    }
}

impl PolicyBias {
    pub fn all_walk() -> Self {
        PolicyBias { walk: 1.0, grab: 0.0, place: 0.0, drop: 0.0, irrelevant: 0.0 }
    }

    pub fn weight(&self, c: ActionCategory) -> f64 {
        match c {
            ActionCategory::Walk => self.walk,
            ActionCategory::Grab => self.grab,
            ActionCategory::Place => self.place,
            ActionCategory::Drop => self.drop,
            ActionCategory::Irrelevant => self.irrelevant,
        }
    }
}

/// Samples one admissible step for `agent`, or `None` when no category with
/// positive weight has an admissible action.
pub fn random_policy(
    state: &WorldState,
    agent: AgentId,
    bias: &PolicyBias,
    rng: &mut impl Rng,
) -> Result<Option<ActionStep>, WorldError> {
    let mut buckets: BTreeMap<ActionCategory, Vec<ActionStep>> = BTreeMap::new();
    for step in enumerate_admissible_actions(state, agent)? {
        if let Some(c) = ActionCategory::of(step.verb) {
            buckets.entry(c).or_default().push(step);
        }
    }
    let live: Vec<(ActionCategory, f64)> = ActionCategory::ALL
        .into_iter()
        .filter(|c| buckets.contains_key(c))
        .map(|c| (c, bias.weight(c)))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    let total: f64 = live.iter().map(|(_, w)| w).sum();
    if live.is_empty() {
        return Ok(None);
    }
    let mut x = rng.gen::<f64>() * total;
    let mut pick = live[live.len() - 1].0;
    for (c, w) in &live {
        if x < *w {
            pick = *c;
            break;
        }
        x -= w;
    }
    Ok(buckets[&pick].choose(rng).cloned())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub n_agents: usize,
    /// Scene with all exploring agents placed.
    pub initial_state: WorldState,
    pub steps: Vec<ActionStep>,
    /// Rooms each portable object passed through, without consecutive repeats.
    #[serde(with = "id_keyed")]
    pub object_paths: BTreeMap<ObjectId, Vec<ObjectId>>,
    /// Portable objects grouped by their final holder, or their room when
    /// held by an agent or lying on the floor.
    #[serde(with = "id_keyed")]
    pub final_locations: BTreeMap<ObjectId, BTreeSet<ObjectId>>,
    pub seed: u64,
}

impl ExplorationTrace {
    pub fn final_state(&self) -> WorldState {
        let mut state = self.initial_state.clone();
        for step in &self.steps {
            state = apply_action(&state, step).expect("trace steps are executable");
        }
        state
    }

    /// Objects that visited at least two rooms.
    pub fn moved_objects(&self) -> impl Iterator<Item = (ObjectId, &[ObjectId])> {
        self.object_paths.iter().filter(|(_, p)| p.len() >= 2).map(|(o, p)| (*o, p.as_slice()))
    }
}

/// Object-id keyed maps as JSON objects with decimal string keys, so they
/// survive buffering inside flattened records.
mod id_keyed {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::world::ObjectId;

    pub fn serialize<V: Serialize, S: Serializer>(map: &BTreeMap<ObjectId, V>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(map.iter().map(|(k, v)| (k.0.to_string(), v)))
    }

    pub fn deserialize<'de, V: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<ObjectId, V>, D::Error> {
        let raw = BTreeMap::<String, V>::deserialize(d)?;
        raw.into_iter().map(|(k, v)| Ok((ObjectId(k.parse().map_err(D::Error::custom)?), v))).collect()
    }
}

fn portable(state: &WorldState) -> impl Iterator<Item = ObjectId> + '_ {
    state.objects().iter().map(|o| o.id).filter(|&o| state.has_property(o, Property::Grabbable))
}

/// Final-location key of a portable object.
pub fn location_key(state: &WorldState, obj: ObjectId) -> ObjectId {
    let o = &state.objects()[obj.0 as usize];
    o.support.map_or(o.location, |s| s.holder)
}

fn final_locations(state: &WorldState) -> BTreeMap<ObjectId, BTreeSet<ObjectId>> {
    let mut out: BTreeMap<ObjectId, BTreeSet<ObjectId>> = BTreeMap::new();
    for o in portable(state) {
        out.entry(location_key(state, o)).or_default().insert(o);
    }
    out
}

/// Builds a trace by replaying `steps` from `state`, which must already hold
/// every acting agent.
pub fn trace_from_steps(state: &WorldState, steps: Vec<ActionStep>, seed: u64) -> Result<ExplorationTrace, WorldError> {
    let mut paths: BTreeMap<ObjectId, Vec<ObjectId>> =
        portable(state).map(|o| (o, vec![state.objects()[o.0 as usize].location])).collect();
    let mut current = state.clone();
    for step in &steps {
        current = apply_action(&current, step)?;
        record_moves(&current, step.agent, &mut paths);
    }
    Ok(ExplorationTrace {
        n_agents: state.agents().len(),
        initial_state: state.clone(),
        final_locations: final_locations(&current),
        object_paths: paths,
        steps,
        seed,
    })
}

fn record_moves(state: &WorldState, agent: AgentId, paths: &mut BTreeMap<ObjectId, Vec<ObjectId>>) {
    let a = state.agent(agent).expect("acting agent exists");
    for &h in &a.holding {
        let path = paths.get_mut(&h).expect("held objects are portable");
        if path.last() != Some(&a.location) {
            path.push(a.location);
        }
    }
}

/// Adds agents until the scene has `n_agents`, then lets them act in
/// round-robin order for `n_steps` ticks.
pub fn explore(
    state: &WorldState,
    n_agents: usize,
    n_steps: usize,
    policy: &PolicyBias,
    seed: u64,
) -> Result<ExplorationTrace, ExploreError> {
    if n_agents == 0 {
        return Err(ExploreError::NoAgents);
    }
    if n_steps == 0 {
        return Err(ExploreError::NoSteps);
    }
    if n_agents > AGENT_NAMES.len() || state.agents().len() > n_agents {
        return Err(ExploreError::TooManyAgents(n_agents));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut initial = state.clone();
    while initial.agents().len() < n_agents {
        let room = *initial.rooms().choose(&mut rng).expect("scenes have rooms");
        initial.add_agent(room)?;
    }
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(n_steps);
    for tick in 0..n_steps {
        let agent = AgentId((tick % n_agents) as u32);
        let step = random_policy(&current, agent, policy, &mut rng)?.ok_or(ExploreError::Stuck(agent))?;
        current = apply_action(&current, &step)?;
        steps.push(step);
    }
    Ok(trace_from_steps(&initial, steps, seed)?)
}

/// Ranges exploration shapes are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExploreConfig {
    pub min_agents: usize,
    pub max_agents: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    pub bias: PolicyBias,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig { min_agents: 1, max_agents: 3, min_steps: 8, max_steps: 40, bias: PolicyBias::default() }
    }
}

impl ExploreConfig {
    /// Draws `(n_agents, n_steps)`.
    pub fn sample_shape(&self, rng: &mut impl Rng) -> (usize, usize) {
        (rng.gen_range(self.min_agents..=self.max_agents), rng.gen_range(self.min_steps..=self.max_steps))
    }
}

fn article(name: &str) -> &'static str {
    match name.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

pub fn agent_name(agent: AgentId) -> &'static str {
    AGENT_NAMES[agent.0 as usize % AGENT_NAMES.len()]
}

/// Past-tense sentence for one step. `mentioned` tracks objects already
/// introduced; a grab of an unmentioned object uses an indefinite article.
pub fn narrate_step(
    state: &WorldState,
    step: &ActionStep,
    mentioned: &mut BTreeSet<ObjectId>,
    rng: &mut impl Rng,
) -> String {
    let who = agent_name(step.agent);
    let the = |i: usize| format!("the {}", state.name_of(step.args[i]));
    let body = match step.verb {
        Verb::Walk => {
            let verb = MOTION_VERBS.choose(rng).expect("non-empty");
            format!("{verb} to {}", the(0))
        }
        Verb::Run => format!("ran to {}", the(0)),
        Verb::Find => format!("found {}", the(0)),
        Verb::Grab => {
            let o = step.args[0];
            let name = state.name_of(o);
            if mentioned.contains(&o) {
                format!("grabbed the {name}")
            } else {
                format!("grabbed {} {name}", article(name))
            }
        }
        Verb::Put => format!("put {} on {}", the(0), the(1)),
        Verb::PutIn => format!("put {} in {}", the(0), the(1)),
        Verb::Pour => format!("poured {} into {}", the(0), the(1)),
        Verb::Sit => format!("sat on {}", the(0)),
        Verb::Lie => format!("lay on {}", the(0)),
        Verb::StandUp => "stood up".to_string(),
        Verb::Sleep => "fell asleep".to_string(),
        Verb::WakeUp => "woke up".to_string(),
        Verb::Open => format!("opened {}", the(0)),
        Verb::Close => format!("closed {}", the(0)),
        Verb::SwitchOn => format!("turned on {}", the(0)),
        Verb::SwitchOff => format!("turned off {}", the(0)),
        Verb::Drink => format!("drank {}", the(0)),
        Verb::TurnTo => format!("turned to {}", the(0)),
        Verb::LookAt => format!("looked at {}", the(0)),
        Verb::Wipe => format!("wiped {}", the(0)),
        Verb::PutOn => format!("put on {}", the(0)),
        Verb::PutOff => format!("took off {}", the(0)),
        Verb::Greet => format!("greeted {}", the(0)),
        Verb::Drop => format!("dropped {}", the(0)),
        Verb::Touch => format!("touched {}", the(0)),
        Verb::Type => format!("typed on {}", the(0)),
        Verb::Watch => format!("watched {}", the(0)),
        Verb::Move => format!("moved {}", the(0)),
        Verb::Wash => format!("washed {}", the(0)),
        Verb::Rinse => format!("rinsed {}", the(0)),
        Verb::Scrub => format!("scrubbed {}", the(0)),
        Verb::Squeeze => format!("squeezed {}", the(0)),
        Verb::PlugIn => format!("plugged in {}", the(0)),
        Verb::PlugOut => format!("unplugged {}", the(0)),
        Verb::Cut => format!("cut {}", the(0)),
        Verb::Eat => format!("ate {}", the(0)),
    };
    mentioned.extend(step.args.iter().copied());
    format!("{who} {body}.")
}

/// One sentence per step, joined by single spaces.
pub fn narrate_steps(initial: &WorldState, steps: &[ActionStep], style_seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(style_seed);
    let mut mentioned = BTreeSet::new();
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(steps.len());
    for step in steps {
        out.push(narrate_step(&state, step, &mut mentioned, &mut rng));
        state = apply_action(&state, step).expect("trace steps are executable");
    }
    out
}

pub fn render_trace_to_narrative(trace: &ExplorationTrace, style_seed: u64) -> String {
    narrate_steps(&trace.initial_state, &trace.steps, style_seed).join(" ")
}
