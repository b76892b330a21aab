//! Goal-oriented MCTS planner.
//!
//! Each committed step runs `simulations_per_step` UCT simulations from the
//! current state and commits the most visited root child. Rewards: a bonus
//! when a step satisfies at least one remaining predicate, plus a per-step
//! penalty. A predicate pays once, when it first holds, and no later step
//! may undo it. Predicates already true at the start never pay and may be
//! broken on the way, but the episode only succeeds once every goal
//! predicate holds.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goals::{satisfied_subset, Activity, BoundPredicate, Goal, GoalError, Predicate};
use crate::world::{
    apply_action, is_executable, render_action_to_text, ActionStep, AgentId, ObjectId, Relation, StateFlag, Verb,
    WorldState,
};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error("no admissible actions for {0}")]
    NoActions(AgentId),
    #[error("invalid planner config: {0}")]
    Config(String),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub reward_satisfy: f64,
    pub step_penalty: f64,
    pub uct_c: f64,
    pub max_depth: usize,
    pub rollout_depth: usize,
    pub simulations_per_step: usize,
    pub seed: u64,
    /// Pay `reward_satisfy` per newly satisfied predicate instead of once per step.
    pub bonus_per_predicate: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            reward_satisfy: 2.0,
            step_penalty: -0.1,
            uct_c: 1.0,
            max_depth: 30,
            rollout_depth: 10,
            simulations_per_step: 200,
            seed: 0,
            bonus_per_predicate: false,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.reward_satisfy > 0.0 && self.step_penalty < 0.0) {
            return Err(PlanError::Config("need reward_satisfy > 0 > step_penalty".into()));
        }
        if self.max_depth == 0 {
            return Err(PlanError::Config("max_depth must be at least 1".into()));
        }
        if self.simulations_per_step == 0 {
            return Err(PlanError::Config("simulations_per_step must be at least 1".into()));
        }
        if !(self.uct_c >= 0.0 && self.uct_c.is_finite()) {
            return Err(PlanError::Config("uct_c must be finite and non-negative".into()));
        }
        Ok(())
    }

    fn reward_for(&self, newly: u32) -> f64 {
        let bonus = match (newly, self.bonus_per_predicate) {
            (0, _) => 0.0,
            (n, true) => self.reward_satisfy * n as f64,
            (_, false) => self.reward_satisfy,
        };
        bonus + self.step_penalty
    }
}

/// Reward for reaching `new_state` with `prev_remaining` still open, and the
/// goal left afterwards.
pub fn step_reward(
    prev_remaining: &Goal,
    new_state: &WorldState,
    cfg: &PlannerConfig,
) -> Result<(f64, Goal), GoalError> {
    let newly = satisfied_subset(new_state, prev_remaining)?;
    Ok((cfg.reward_for(newly.len() as u32), prev_remaining.difference(&newly)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChildStats {
    pub visits: u32,
    pub total_value: f64,
}

/// Index of the child UCT picks. Unvisited children come first; ties go to
/// the lowest index.
pub fn uct_select(parent_visits: u32, children: &[ChildStats], c: f64) -> usize {
    assert!(!children.is_empty(), "uct_select needs at least one child");
    if let Some(i) = children.iter().position(|s| s.visits == 0) {
        return i;
    }
    let ln_n = (parent_visits.max(1) as f64).ln();
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, s) in children.iter().enumerate() {
        let n = s.visits as f64;
        let score = s.total_value / n + c * (ln_n / n).sqrt();
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub simulations: u64,
    pub nodes_expanded: u64,
    pub max_tree_depth: usize,
    /// Predicates still open when planning stopped.
    pub remaining: Vec<Predicate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanEpisode {
    pub activity: Activity,
    pub agent: AgentId,
    pub initial_state: WorldState,
    pub initial_condition: String,
    pub steps: Vec<ActionStep>,
    pub per_step_reward: Vec<f64>,
    /// Predicates first satisfied by each step.
    pub newly_satisfied: Vec<Vec<Predicate>>,
    pub success: bool,
    pub stats: SearchStats,
}

impl PlanEpisode {
    /// Steps rendered with their templates.
    pub fn rendered_steps(&self) -> Vec<String> {
        let mut state = self.initial_state.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            out.push(render_action_to_text(&state, step).expect("episode steps are well formed"));
            state = apply_action(&state, step).expect("episode steps are executable");
        }
        out
    }

    /// Plan text, e.g. `Walk to living room. Sit on sofa. Turn on TV.`
    pub fn plan_text(&self) -> String {
        join_plan(&self.rendered_steps())
    }

    pub fn final_state(&self) -> WorldState {
        let mut state = self.initial_state.clone();
        for step in &self.steps {
            state = apply_action(&state, step).expect("episode steps are executable");
        }
        state
    }

    pub fn satisfaction_events(&self) -> usize {
        self.newly_satisfied.iter().filter(|s| !s.is_empty()).count()
    }
}

/// Joins rendered steps into sentence form.
pub fn join_plan(steps: &[String]) -> String {
    let mut s = String::new();
    for (i, step) in steps.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(step);
        s.push('.');
    }
    s
}

/// Goal with predicates bound once; `remaining` masks are bit sets over it.
struct BoundGoal {
    preds: Vec<(Predicate, BoundPredicate)>,
}

impl BoundGoal {
    fn new(goal: &Goal, state: &WorldState) -> Result<Self, GoalError> {
        assert!(goal.len() <= 64, "goals are limited to 64 predicates");
        let preds = goal.iter().map(|p| Ok((p.clone(), p.bind(state)?))).collect::<Result<Vec<_>, GoalError>>()?;
        Ok(BoundGoal { preds })
    }

    fn full(&self) -> u64 {
        if self.preds.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.preds.len()) - 1
        }
    }

    fn newly(&self, state: &WorldState, remaining: u64) -> u64 {
        let mut out = 0;
        for (i, (_, b)) in self.preds.iter().enumerate() {
            if remaining & (1 << i) != 0 && b.holds(state) {
                out |= 1 << i;
            }
        }
        out
    }

    /// Predicates in `mask` that do not hold in `state`.
    fn failing(&self, state: &WorldState, mask: u64) -> u64 {
        let mut out = 0;
        for (i, (_, b)) in self.preds.iter().enumerate() {
            if mask & (1 << i) != 0 && !b.holds(state) {
                out |= 1 << i;
            }
        }
        out
    }

    /// Goal bookkeeping after a step into `state`: the newly paid bits and
    /// the next `(remaining, paid)` pair. Predicates in `free` (those true at
    /// the start) never pay and may be broken and restored; any other
    /// predicate pays once, when it first holds, and stays protected.
    fn advance(&self, state: &WorldState, paid: u64, free: u64) -> (u64, u64, u64) {
        let holding = self.full() & !self.failing(state, self.full());
        let newly = holding & !paid & !free;
        (newly, self.full() & !holding, paid | newly)
    }

    fn listed(&self, mask: u64) -> Vec<Predicate> {
        self.preds.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, (p, _))| p.clone()).collect()
    }
}

const UNARY_VERBS: [Verb; 8] =
    [Verb::Grab, Verb::Open, Verb::Close, Verb::SwitchOn, Verb::SwitchOff, Verb::Sit, Verb::Wipe, Verb::Wash];

/// The planner's action space: walking between rooms, standing up, and
/// state-changing verbs on instances of the activity's relevant classes
/// (plus containers currently holding them).
pub fn planning_actions(state: &WorldState, agent: AgentId, relevant: &[ObjectId]) -> Vec<ActionStep> {
    let mut touch: BTreeSet<ObjectId> = relevant.iter().copied().collect();
    for &o in relevant {
        if let Some(s) = state.objects()[o.0 as usize].support {
            if s.relation == Relation::In {
                touch.insert(s.holder);
            }
        }
    }
    let mut out = Vec::new();
    let mut push = |step: ActionStep| {
        if is_executable(state, &step) {
            out.push(step);
        }
    };
    for &room in state.rooms() {
        push(ActionStep::unary(agent, Verb::Walk, room));
    }
    push(ActionStep::nullary(agent, Verb::StandUp));
    for verb in UNARY_VERBS {
        for &o in &touch {
            push(ActionStep::unary(agent, verb, o));
        }
    }
    let held = state.agent(agent).map(|a| a.holding.clone()).unwrap_or_default();
    for verb in [Verb::Put, Verb::PutIn] {
        for &h in &held {
            for &o in &touch {
                push(ActionStep::binary(agent, verb, h, o));
            }
        }
    }
    out.sort();
    out
}

/// Non-room instances of the activity's relevant classes.
pub fn relevant_instances(state: &WorldState, activity: &Activity) -> Vec<ObjectId> {
    let mut out: Vec<ObjectId> = activity
        .relevant_classes
        .iter()
        .flat_map(|c| state.instances_named(c))
        .filter(|&o| !state.is_room(o))
        .collect();
    out.sort();
    out.dedup();
    out
}

struct Node {
    state: WorldState,
    remaining: u64,
    /// Predicates that paid out on this branch; never undone.
    protected: u64,
    /// Steps from the episode start.
    depth: usize,
    visits: u32,
    value: f64,
    /// Reward of the step leading into this node.
    reward: f64,
    step: Option<ActionStep>,
    children: Vec<usize>,
    untried: Option<Vec<(ActionStep, WorldState)>>,
}

struct Search<'a> {
    cfg: &'a PlannerConfig,
    goal: &'a BoundGoal,
    /// Predicates true at the episode start.
    free: u64,
    agent: AgentId,
    relevant: &'a [ObjectId],
    nodes: Vec<Node>,
    stats: &'a mut SearchStats,
}

impl Search<'_> {
    /// Planning actions that keep every achieved predicate true, paired with
    /// their successor states.
    fn safe_actions(&self, state: &WorldState, protected: u64) -> Vec<(ActionStep, WorldState)> {
        planning_actions(state, self.agent, self.relevant)
            .into_iter()
            .map(|a| {
                let next = apply_action(state, &a).expect("candidate actions are executable");
                (a, next)
            })
            .filter(|(_, next)| self.goal.failing(next, protected) == 0)
            .collect()
    }

    fn terminal(&self, idx: usize) -> bool {
        let n = &self.nodes[idx];
        n.remaining == 0 || n.depth >= self.cfg.max_depth
    }

    fn simulate(&mut self, rng: &mut ChaCha8Rng) {
        let mut path = vec![0usize];
        let mut cur = 0usize;
        loop {
            if self.terminal(cur) {
                break;
            }
            if self.nodes[cur].untried.is_none() {
                let mut acts = self.safe_actions(&self.nodes[cur].state, self.nodes[cur].protected);
                acts.reverse();
                self.nodes[cur].untried = Some(acts);
            }
            if let Some((step, state)) = self.nodes[cur].untried.as_mut().and_then(Vec::pop) {
                let child = self.expand(cur, step, state);
                path.push(child);
                cur = child;
                break;
            }
            if self.nodes[cur].children.is_empty() {
                break;
            }
            let stats: Vec<ChildStats> = self.nodes[cur]
                .children
                .iter()
                .map(|&c| ChildStats { visits: self.nodes[c].visits, total_value: self.nodes[c].value })
                .collect();
            let pick = uct_select(self.nodes[cur].visits, &stats, self.cfg.uct_c);
            cur = self.nodes[cur].children[pick];
            path.push(cur);
        }
        self.stats.max_tree_depth = self.stats.max_tree_depth.max(path.len() - 1);
        let tail = if self.terminal(cur) { 0.0 } else { self.rollout(cur, rng) };
        // Each node's value is the return from its incoming step onward.
        let mut g = tail;
        for &idx in path.iter().rev() {
            let node = &mut self.nodes[idx];
            g += node.reward;
            node.visits += 1;
            node.value += g;
        }
        self.stats.simulations += 1;
    }

    fn expand(&mut self, parent: usize, step: ActionStep, state: WorldState) -> usize {
        let p = &self.nodes[parent];
        let (newly, remaining, protected) = self.goal.advance(&state, p.protected, self.free);
        let node = Node {
            remaining,
            protected,
            depth: p.depth + 1,
            visits: 0,
            value: 0.0,
            reward: self.cfg.reward_for(newly.count_ones()),
            step: Some(step),
            children: Vec::new(),
            untried: None,
            state,
        };
        let idx = self.nodes.len();
        self.nodes.push(node);
        self.nodes[parent].children.push(idx);
        self.stats.nodes_expanded += 1;
        idx
    }

    fn rollout(&self, from: usize, rng: &mut ChaCha8Rng) -> f64 {
        let n = &self.nodes[from];
        let mut state = n.state.clone();
        let (mut remaining, mut protected) = (n.remaining, n.protected);
        let mut total = 0.0;
        for depth in (n.depth..).take(self.cfg.rollout_depth) {
            if remaining == 0 || depth >= self.cfg.max_depth {
                break;
            }
            let mut acts = self.safe_actions(&state, protected);
            if acts.is_empty() {
                break;
            }
            let pick = rng.gen_range(0..acts.len());
            state = acts.swap_remove(pick).1;
            let newly;
            (newly, remaining, protected) = self.goal.advance(&state, protected, self.free);
            total += self.cfg.reward_for(newly.count_ones());
        }
        total
    }
}

/// Plans `activity` for agent 0 of `state`.
pub fn plan(state: &WorldState, activity: &Activity, cfg: &PlannerConfig) -> Result<PlanEpisode, PlanError> {
    plan_for_agent(state, AgentId(0), activity, cfg)
}

pub fn plan_for_agent(
    state: &WorldState,
    agent: AgentId,
    activity: &Activity,
    cfg: &PlannerConfig,
) -> Result<PlanEpisode, PlanError> {
    cfg.validate()?;
    if state.agent(agent).is_none() {
        return Err(PlanError::UnknownAgent(agent));
    }
    let goal = BoundGoal::new(&activity.goal, state)?;
    let relevant = relevant_instances(state, activity);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = SearchStats::default();

    let free = goal.newly(state, goal.full());
    let mut remaining = goal.full() & !free;
    let mut protected = 0u64;
    let mut current = state.clone();
    let mut steps = Vec::new();
    let mut rewards = Vec::new();
    let mut newly_satisfied = Vec::new();

    if remaining != 0 && planning_actions(state, agent, &relevant).is_empty() {
        return Err(PlanError::NoActions(agent));
    }
    while remaining != 0 && steps.len() < cfg.max_depth {
        let root = Node {
            state: current.clone(),
            remaining,
            protected,
            depth: steps.len(),
            visits: 0,
            value: 0.0,
            reward: 0.0,
            step: None,
            children: Vec::new(),
            untried: None,
        };
        let mut search =
            Search { cfg, goal: &goal, free, agent, relevant: &relevant, nodes: vec![root], stats: &mut stats };
        for _ in 0..cfg.simulations_per_step {
            search.simulate(&mut rng);
        }
        let root = &search.nodes[0];
        // Most visited child; ties go to the earliest in step order.
        let Some(best) = root.children.iter().copied().max_by(|&a, &b| {
            let (na, nb) = (&search.nodes[a], &search.nodes[b]);
            na.visits.cmp(&nb.visits).then_with(|| nb.step.cmp(&na.step))
        }) else {
            break;
        };
        let chosen = &search.nodes[best];
        let step = chosen.step.clone().expect("children carry their step");
        let newly = chosen.protected & !protected;
        rewards.push(chosen.reward);
        newly_satisfied.push(goal.listed(newly));
        remaining = chosen.remaining;
        protected = chosen.protected;
        current = chosen.state.clone();
        steps.push(step);
    }
    stats.remaining = goal.listed(remaining);
    Ok(PlanEpisode {
        activity: activity.clone(),
        agent,
        initial_state: state.clone(),
        initial_condition: render_initial_condition(state, activity, false, cfg.seed),
        steps,
        per_step_reward: rewards,
        newly_satisfied,
        success: remaining == 0,
        stats,
    })
}

fn join_names(names: &[&str]) -> String {
    match names {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// Describes one observable fact about `obj`, e.g. `The TV is on.`
pub fn describe_object_state(state: &WorldState, obj: ObjectId, pick: usize) -> Option<String> {
    let o = state.object(obj)?;
    if state.is_room(obj) {
        return None;
    }
    let name = state.name_of(obj);
    let mut facts = Vec::new();
    for (flag, word) in [
        (StateFlag::SwitchedOn, "on"),
        (StateFlag::SwitchedOff, "off"),
        (StateFlag::Open, "open"),
        (StateFlag::Closed, "closed"),
        (StateFlag::Clean, "clean"),
        (StateFlag::Dirty, "dirty"),
    ] {
        if o.flags.has(flag) {
            facts.push(format!("The {name} is {word}."));
        }
    }
    if let Some(s) = o.support {
        facts.push(format!("The {name} is {} the {}.", s.relation.preposition(), state.name_of(s.holder)));
    }
    if facts.is_empty() {
        return None;
    }
    Some(facts.swap_remove(pick % facts.len()))
}

/// Relevant classes followed by where their objects are, e.g.
/// `living room, sofa, TV. The sofa and TV are in the living room.`
///
/// With `confusing`, one to three true facts about unrelated objects are
/// appended.
pub fn render_initial_condition(state: &WorldState, activity: &Activity, confusing: bool, seed: u64) -> String {
    let mut text = format!("{}.", activity.relevant_classes.join(", "));
    let catalog = state.catalog();
    // Group items by room, rooms in order of first mention.
    let mut groups: Vec<(ObjectId, Vec<&str>)> = Vec::new();
    for class in activity.items(catalog) {
        let Some(&obj) = state.instances_named(class).first() else { continue };
        let room = state.objects()[obj.0 as usize].location;
        match groups.iter_mut().find(|(r, _)| *r == room) {
            Some((_, names)) => names.push(class),
            None => groups.push((room, vec![class])),
        }
    }
    for (room, names) in &groups {
        let verb = if names.len() == 1 { "is" } else { "are" };
        text.push_str(&format!(" The {} {verb} in the {}.", join_names(names), state.name_of(*room)));
    }
    if confusing {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<ObjectId> = state
            .objects()
            .iter()
            .filter(|o| {
                let name = state.name_of(o.id);
                !state.is_room(o.id) && !activity.is_relevant(name)
            })
            .map(|o| o.id)
            .collect();
        pool.sort_by_key(|&o| (state.name_of(o).to_string(), o));
        pool.dedup_by_key(|o| state.name_of(*o).to_string());
        pool.shuffle(&mut rng);
        let n = rng.gen_range(1..=3);
        for obj in pool.into_iter().take(n) {
            if let Some(fact) = describe_object_state(state, obj, rng.gen()) {
                text.push(' ');
                text.push_str(&fact);
            }
        }
    }
    text
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::goals::{builtin_activities, evaluate_predicate};
    use crate::world::{sample_scene, Catalog, SceneSize};

    fn setup(name: &str, seed: u64) -> (WorldState, Activity) {
        let c = Arc::new(Catalog::builtin());
        let act = builtin_activities(&c).into_iter().find(|a| a.name == name).unwrap();
        (sample_scene(&c, seed, SceneSize::Medium), act)
    }

    #[test]
    fn step_reward_examples() {
        let (s, act) = setup("watch TV", 1);
        let cfg = PlannerConfig::default();
        let (r, rest) = step_reward(&act.goal, &s, &cfg).unwrap();
        assert_eq!(r, -0.1);
        assert_eq!(rest, act.goal);
        let ep = plan(&s, &act, &cfg).unwrap();
        assert!(ep.success);
        for (r, n) in ep.per_step_reward.iter().zip(&ep.newly_satisfied) {
            assert_eq!(*r, if n.is_empty() { -0.1 } else { 2.0 - 0.1 });
        }
    }

    #[test]
    fn flat_bonus_versus_per_predicate() {
        let flat = PlannerConfig::default();
        let per = PlannerConfig { bonus_per_predicate: true, ..flat.clone() };
        assert_eq!(flat.reward_for(2), 1.9);
        assert_eq!(per.reward_for(2), 3.9);
        assert_eq!(per.reward_for(0), -0.1);
    }

    #[test]
    fn uct_examples() {
        let one = [ChildStats { visits: 3, total_value: 1.0 }];
        assert_eq!(uct_select(3, &one, 1.0), 0);
        let two = [ChildStats { visits: 4, total_value: 4.0 * -0.1 }, ChildStats { visits: 4, total_value: 4.0 * 1.9 }];
        assert_eq!(uct_select(8, &two, 0.0), 1);
        let fresh = [ChildStats { visits: 4, total_value: 9.0 }, ChildStats::default()];
        assert_eq!(uct_select(4, &fresh, 1.0), 1);
        let tie = [ChildStats { visits: 2, total_value: 1.0 }; 3];
        assert_eq!(uct_select(6, &tie, 1.0), 0);
    }

    #[test]
    fn watch_tv_plan() {
        let (s, act) = setup("watch TV", 5);
        let ep = plan(&s, &act, &PlannerConfig::default()).unwrap();
        assert!(ep.success, "{:?}", ep.stats);
        let steps = ep.rendered_steps();
        assert!(steps.iter().any(|t| t == "Sit on sofa"), "{steps:?}");
        assert!(steps.iter().any(|t| t == "Turn on TV"), "{steps:?}");
        let in_living_room = s.agents()[0].location == s.room_named("living room").unwrap();
        assert!(in_living_room || steps.iter().any(|t| t == "Walk to living room"), "{steps:?}");
    }

    #[test]
    fn already_satisfied_goal_gives_empty_success() {
        let (s, mut act) = setup("watch TV", 2);
        act.goal = Goal::new(["CLOSED(fridge)".parse().unwrap()]).unwrap();
        let ep = plan(&s, &act, &PlannerConfig::default()).unwrap();
        assert!(ep.success);
        assert!(ep.steps.is_empty());
    }

    #[test]
    fn deterministic_given_seed() {
        let (s, act) = setup("set up table", 9);
        let cfg = PlannerConfig { seed: 17, ..Default::default() };
        let a = plan(&s, &act, &cfg).unwrap();
        let b = plan(&s, &act, &cfg).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.per_step_reward, b.per_step_reward);
        assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn initial_condition_text() {
        let (s, act) = setup("watch TV", 0);
        assert_eq!(
            render_initial_condition(&s, &act, false, 0),
            "living room, sofa, TV. The sofa and TV are in the living room."
        );
        let plain = render_initial_condition(&s, &act, false, 0);
        for seed in 0..20 {
            let noisy = render_initial_condition(&s, &act, true, seed);
            assert_eq!(noisy, render_initial_condition(&s, &act, true, seed));
            let extra = &noisy[plain.len()..];
            let n = extra.matches(". ").count() + extra.ends_with('.') as usize;
            assert!((1..=3).contains(&n), "{noisy}");
            for class in &act.relevant_classes {
                assert!(!extra.contains(&format!("The {class} ")), "{noisy}");
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let (s, act) = setup("watch TV", 0);
        let bad = PlannerConfig { max_depth: 0, ..Default::default() };
        assert!(matches!(plan(&s, &act, &bad), Err(PlanError::Config(_))));
        let bad = PlannerConfig { step_penalty: 0.1, ..Default::default() };
        assert!(plan(&s, &act, &bad).is_err());
    }

    #[test]
    fn success_means_whole_goal_holds() {
        for name in ["set up table", "hang up clothes", "eat apple", "wash dishes"] {
            for seed in 0..4 {
                let (s, act) = setup(name, seed * 7 + 1);
                let ep = plan(&s, &act, &PlannerConfig { seed, ..Default::default() }).unwrap();
                let end = ep.final_state();
                let all = act.goal.iter().all(|p| evaluate_predicate(&end, p).unwrap());
                assert_eq!(ep.success, all, "{name} {seed}: {}", ep.plan_text());
                // Each predicate pays at most once.
                let paid: usize = ep.newly_satisfied.iter().map(Vec::len).sum();
                assert!(paid <= act.goal.len());
            }
        }
    }
}
