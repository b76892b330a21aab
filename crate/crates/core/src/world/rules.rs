//! Action preconditions and effects.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::action::{ActionStep, Verb};
use super::catalog::Property;
use super::state::{AgentId, ObjectId, Posture, Relation, StateFlag, Support, WorldState, HAND_CAPACITY};
use super::WorldError;

/// Reason a well-formed step is not executable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NotCoLocated { object: ObjectId },
    NotARoom { object: ObjectId },
    TargetIsRoom { object: ObjectId },
    AlreadyThere,
    MissingProperty { object: ObjectId, property: Property },
    HandsFull,
    AlreadyHeld { object: ObjectId },
    NotHolding { object: ObjectId },
    SameObject,
    PortableHolder { object: ObjectId },
    InsideClosedContainer { object: ObjectId },
    ContainerClosed { object: ObjectId },
    AlreadyOpen { object: ObjectId },
    AlreadyClosed { object: ObjectId },
    AlreadyOn { object: ObjectId },
    AlreadyOff { object: ObjectId },
    NotStanding,
    AlreadyStanding,
    NotLying,
    Asleep,
    NotAsleep,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotCoLocated { object } => write!(f, "not co-located with {object}"),
            Violation::NotARoom { object } => write!(f, "{object} is not a room"),
            Violation::TargetIsRoom { object } => write!(f, "{object} is a room"),
            Violation::AlreadyThere => f.write_str("already there"),
            Violation::MissingProperty { object, property } => {
                write!(f, "{object} is not {property}")
            }
            Violation::HandsFull => f.write_str("hands full"),
            Violation::AlreadyHeld { object } => write!(f, "{object} already held"),
            Violation::NotHolding { object } => write!(f, "not holding {object}"),
            Violation::SameObject => f.write_str("same object twice"),
            Violation::PortableHolder { object } => write!(f, "{object} is portable"),
            Violation::InsideClosedContainer { object } => {
                write!(f, "{object} is inside a closed container")
            }
            Violation::ContainerClosed { object } => write!(f, "{object} is closed"),
            Violation::AlreadyOpen { object } => write!(f, "{object} already open"),
            Violation::AlreadyClosed { object } => write!(f, "{object} already closed"),
            Violation::AlreadyOn { object } => write!(f, "{object} already on"),
            Violation::AlreadyOff { object } => write!(f, "{object} already off"),
            Violation::NotStanding => f.write_str("not standing"),
            Violation::AlreadyStanding => f.write_str("already standing"),
            Violation::NotLying => f.write_str("not lying"),
            Violation::Asleep => f.write_str("asleep"),
            Violation::NotAsleep => f.write_str("not asleep"),
        }
    }
}

/// Checks that ids resolve and the arity matches.
fn check_well_formed(state: &WorldState, step: &ActionStep) -> Result<(), WorldError> {
    if state.agent(step.agent).is_none() {
        return Err(WorldError::UnknownAgent(step.agent));
    }
    if !step.arity_ok() {
        return Err(WorldError::Arity { verb: step.verb, expected: step.verb.arity(), got: step.args.len() });
    }
    for a in &step.args {
        if state.object(*a).is_none() {
            return Err(WorldError::UnknownObject(*a));
        }
    }
    Ok(())
}

/// Returns every precondition the step violates; empty means executable.
///
/// Malformed steps (unknown ids, wrong arity) are reported as errors rather
/// than violations.
pub fn check_preconditions(state: &WorldState, step: &ActionStep) -> Result<Vec<Violation>, WorldError> {
    check_well_formed(state, step)?;
    let mut v = Vec::new();
    collect_violations(state, step, &mut v);
    Ok(v)
}

/// True iff the step is well formed and executable.
pub fn is_executable(state: &WorldState, step: &ActionStep) -> bool {
    matches!(check_preconditions(state, step), Ok(v) if v.is_empty())
}

fn collect_violations(state: &WorldState, step: &ActionStep, v: &mut Vec<Violation>) {
    let agent = &state.agents[step.agent.0 as usize];
    let here = agent.location;
    let posture = agent.posture;

    if matches!(posture, Posture::Sleeping(_)) && step.verb != Verb::WakeUp {
        v.push(Violation::Asleep);
    }

    let require = |v: &mut Vec<Violation>, obj: ObjectId, p: Property| {
        if !state.has_property(obj, p) {
            v.push(Violation::MissingProperty { object: obj, property: p });
        }
    };
    let colocated = |v: &mut Vec<Violation>, obj: ObjectId| {
        if state.objects[obj.0 as usize].location != here {
            v.push(Violation::NotCoLocated { object: obj });
        }
    };
    let not_room = |v: &mut Vec<Violation>, obj: ObjectId| {
        if state.is_room(obj) {
            v.push(Violation::TargetIsRoom { object: obj });
        }
    };
    let reachable = |v: &mut Vec<Violation>, obj: ObjectId| {
        if state.inside_closed_container(obj) {
            v.push(Violation::InsideClosedContainer { object: obj });
        }
    };
    let standing = |v: &mut Vec<Violation>| {
        if !matches!(posture, Posture::Standing | Posture::Sleeping(_)) {
            v.push(Violation::NotStanding);
        }
    };
    // Plain interaction with a co-located, reachable, non-room object.
    let touchable = |v: &mut Vec<Violation>, obj: ObjectId| {
        not_room(v, obj);
        colocated(v, obj);
        reachable(v, obj);
    };

    let a0 = step.args.first().copied();
    let a1 = step.args.get(1).copied();

    match step.verb {
        Verb::Walk | Verb::Run => {
            let dest = a0.unwrap();
            standing(v);
            if !state.is_room(dest) {
                v.push(Violation::NotARoom { object: dest });
            } else if dest == here {
                v.push(Violation::AlreadyThere);
            }
        }
        Verb::Find => {
            let target = a0.unwrap();
            standing(v);
            if state.is_room(target) {
                if target == here {
                    v.push(Violation::AlreadyThere);
                }
            } else {
                if state.holder_agent(target).is_some() {
                    v.push(Violation::AlreadyHeld { object: target });
                }
                reachable(v, target);
            }
        }
        Verb::Sit | Verb::Lie => {
            let target = a0.unwrap();
            standing(v);
            touchable(v, target);
            let p = if step.verb == Verb::Sit { Property::Sittable } else { Property::Lieable };
            require(v, target, p);
        }
        Verb::StandUp => {
            if posture == Posture::Standing {
                v.push(Violation::AlreadyStanding);
            }
        }
        Verb::Sleep => {
            if !matches!(posture, Posture::Lying(_)) {
                v.push(Violation::NotLying);
            }
        }
        Verb::WakeUp => {
            if !matches!(posture, Posture::Sleeping(_)) {
                v.push(Violation::NotAsleep);
            }
        }
        Verb::Grab => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Grabbable);
            if state.holder_agent(target).is_some() {
                v.push(Violation::AlreadyHeld { object: target });
            }
            if agent.holding.len() >= HAND_CAPACITY {
                v.push(Violation::HandsFull);
            }
        }
        Verb::Open | Verb::Close => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Openable);
            let flags = state.objects[target.0 as usize].flags;
            if step.verb == Verb::Open && flags.has(StateFlag::Open) {
                v.push(Violation::AlreadyOpen { object: target });
            }
            if step.verb == Verb::Close && flags.has(StateFlag::Closed) {
                v.push(Violation::AlreadyClosed { object: target });
            }
        }
        Verb::SwitchOn | Verb::SwitchOff => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Switchable);
            let flags = state.objects[target.0 as usize].flags;
            if step.verb == Verb::SwitchOn && flags.has(StateFlag::SwitchedOn) {
                v.push(Violation::AlreadyOn { object: target });
            }
            if step.verb == Verb::SwitchOff && flags.has(StateFlag::SwitchedOff) {
                v.push(Violation::AlreadyOff { object: target });
            }
        }
        Verb::Put | Verb::PutIn => {
            let (item, holder) = (a0.unwrap(), a1.unwrap());
            if !agent.holds(item) {
                v.push(Violation::NotHolding { object: item });
            }
            if item == holder {
                v.push(Violation::SameObject);
            }
            touchable(v, holder);
            let p = if step.verb == Verb::Put { Property::Surface } else { Property::Container };
            require(v, holder, p);
            if state.has_property(holder, Property::Grabbable) {
                v.push(Violation::PortableHolder { object: holder });
            }
            if step.verb == Verb::PutIn && state.objects[holder.0 as usize].flags.has(StateFlag::Closed) {
                v.push(Violation::ContainerClosed { object: holder });
            }
        }
        Verb::Pour => {
            let (liquid, vessel) = (a0.unwrap(), a1.unwrap());
            if !agent.holds(liquid) {
                v.push(Violation::NotHolding { object: liquid });
            }
            require(v, liquid, Property::Drinkable);
            if liquid == vessel {
                v.push(Violation::SameObject);
            }
            touchable(v, vessel);
            require(v, vessel, Property::Container);
        }
        Verb::Drop => {
            let target = a0.unwrap();
            if !agent.holds(target) {
                v.push(Violation::NotHolding { object: target });
            }
        }
        Verb::Drink => {
            let target = a0.unwrap();
            if !agent.holds(target) {
                v.push(Violation::NotHolding { object: target });
            }
            require(v, target, Property::Drinkable);
        }
        Verb::Eat | Verb::Cut => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Eatable);
        }
        Verb::Squeeze | Verb::PutOn | Verb::PutOff => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Grabbable);
        }
        Verb::PlugIn | Verb::PlugOut => {
            let target = a0.unwrap();
            touchable(v, target);
            require(v, target, Property::Switchable);
        }
        Verb::Wipe
        | Verb::Wash
        | Verb::Rinse
        | Verb::Scrub
        | Verb::TurnTo
        | Verb::LookAt
        | Verb::Touch
        | Verb::Watch
        | Verb::Greet
        | Verb::Type
        | Verb::Move => {
            touchable(v, a0.unwrap());
        }
    }
}

/// Applies an executable step, returning the successor state. The input is
/// left untouched.
pub fn apply_action(state: &WorldState, step: &ActionStep) -> Result<WorldState, WorldError> {
    let violations = check_preconditions(state, step)?;
    if !violations.is_empty() {
        return Err(WorldError::Rejected { step: step.clone(), violations });
    }
    let mut next = state.clone();
    apply_unchecked(&mut next, step);
    Ok(next)
}

/// Applies a step already known to be executable, in place.
pub(crate) fn apply_unchecked(state: &mut WorldState, step: &ActionStep) {
    let who = step.agent;
    let a0 = step.args.first().copied();
    let a1 = step.args.get(1).copied();
    match step.verb {
        Verb::Walk | Verb::Run => move_agent(state, who, a0.unwrap(), None),
        Verb::Find => {
            let target = a0.unwrap();
            let dest = state.objects[target.0 as usize].location;
            let facing = (!state.is_room(target)).then_some(target);
            move_agent(state, who, dest, facing);
        }
        Verb::Sit => {
            state.agent_mut(who).posture = Posture::Sitting(a0.unwrap());
        }
        Verb::Lie => {
            state.agent_mut(who).posture = Posture::Lying(a0.unwrap());
        }
        Verb::StandUp => state.agent_mut(who).posture = Posture::Standing,
        Verb::Sleep => {
            let agent = state.agent_mut(who);
            if let Posture::Lying(on) = agent.posture {
                agent.posture = Posture::Sleeping(on);
            }
        }
        Verb::WakeUp => {
            let agent = state.agent_mut(who);
            if let Posture::Sleeping(on) = agent.posture {
                agent.posture = Posture::Lying(on);
            }
        }
        Verb::Grab => {
            let target = a0.unwrap();
            let here = state.agent(who).unwrap().location;
            let obj = state.object_mut(target);
            obj.support = None;
            obj.location = here;
            let agent = state.agent_mut(who);
            agent.holding.push(target);
            agent.facing = Some(target);
        }
        Verb::Put | Verb::PutIn => {
            let (item, holder) = (a0.unwrap(), a1.unwrap());
            let relation = if step.verb == Verb::Put { Relation::On } else { Relation::In };
            let holder_room = state.objects[holder.0 as usize].location;
            let obj = state.object_mut(item);
            obj.support = Some(Support { relation, holder });
            obj.location = holder_room;
            let agent = state.agent_mut(who);
            agent.holding.retain(|o| *o != item);
            agent.facing = Some(holder);
        }
        Verb::Drop => {
            let item = a0.unwrap();
            let here = state.agent(who).unwrap().location;
            let obj = state.object_mut(item);
            obj.support = None;
            obj.location = here;
            state.agent_mut(who).holding.retain(|o| *o != item);
        }
        Verb::Open | Verb::Close | Verb::SwitchOn | Verb::SwitchOff => {
            let target = a0.unwrap();
            let flags = &mut state.object_mut(target).flags;
            match step.verb {
                Verb::Open => flags.toggle_to(StateFlag::Open, StateFlag::Closed),
                Verb::Close => flags.toggle_to(StateFlag::Closed, StateFlag::Open),
                Verb::SwitchOn => flags.toggle_to(StateFlag::SwitchedOn, StateFlag::SwitchedOff),
                _ => flags.toggle_to(StateFlag::SwitchedOff, StateFlag::SwitchedOn),
            }
            state.agent_mut(who).facing = Some(target);
        }
        Verb::Wipe | Verb::Wash | Verb::Rinse | Verb::Scrub => {
            let target = a0.unwrap();
            state.object_mut(target).flags.toggle_to(StateFlag::Clean, StateFlag::Dirty);
            state.agent_mut(who).facing = Some(target);
        }
        Verb::Pour => {
            state.agent_mut(who).facing = Some(a1.unwrap());
        }
        Verb::Drink
        | Verb::Eat
        | Verb::Cut
        | Verb::Squeeze
        | Verb::PutOn
        | Verb::PutOff
        | Verb::PlugIn
        | Verb::PlugOut
        | Verb::TurnTo
        | Verb::LookAt
        | Verb::Touch
        | Verb::Watch
        | Verb::Greet
        | Verb::Type
        | Verb::Move => {
            state.agent_mut(who).facing = Some(a0.unwrap());
        }
    }
    state.step_count += 1;
}

fn move_agent(state: &mut WorldState, who: AgentId, dest: ObjectId, facing: Option<ObjectId>) {
    let held = {
        let agent = state.agent_mut(who);
        agent.location = dest;
        agent.facing = facing;
        agent.holding.clone()
    };
    for obj in held {
        state.object_mut(obj).location = dest;
    }
}

/// Every executable step for `agent`, sorted by verb then argument ids.
pub fn enumerate_admissible_actions(state: &WorldState, agent: AgentId) -> Result<Vec<ActionStep>, WorldError> {
    let holder = state.agent(agent).ok_or(WorldError::UnknownAgent(agent))?;
    let held = holder.holding.clone();
    let n = state.objects.len() as u32;
    let mut out = Vec::new();
    for &verb in Verb::ALL {
        match verb.arity() {
            0 => push_if_ok(state, ActionStep::nullary(agent, verb), &mut out),
            1 => {
                for o in 0..n {
                    push_if_ok(state, ActionStep::unary(agent, verb, ObjectId(o)), &mut out);
                }
            }
            _ => {
                // All binary verbs require holding their first argument.
                let mut firsts = held.clone();
                firsts.sort();
                for &first in &firsts {
                    for o in 0..n {
                        let step = ActionStep::binary(agent, verb, first, ObjectId(o));
                        push_if_ok(state, step, &mut out);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn push_if_ok(state: &WorldState, step: ActionStep, out: &mut Vec<ActionStep>) {
    let mut v = Vec::new();
    collect_violations(state, &step, &mut v);
    if v.is_empty() {
        out.push(step);
    }
}

/// Renders a step with object class names substituted into its template.
pub fn render_action_to_text(state: &WorldState, step: &ActionStep) -> Result<String, WorldError> {
    check_well_formed(state, step)?;
    let names: Vec<&str> = step.args.iter().map(|a| state.name_of(*a)).collect();
    Ok(step.verb.render(&names))
}
