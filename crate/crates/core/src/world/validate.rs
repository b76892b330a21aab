use std::collections::BTreeMap;

use super::catalog::Property;
use super::state::{ObjectId, Posture, Relation, StateFlag, WorldState, HAND_CAPACITY};

/// Returns one message per broken invariant; empty iff the state is valid.
pub fn validate_state(state: &WorldState) -> Vec<String> {
    let mut out = Vec::new();
    let cat = state.catalog();
    let n = state.objects().len();
    let resolves = |id: ObjectId| (id.0 as usize) < n;

    for (i, o) in state.objects().iter().enumerate() {
        if o.id.0 as usize != i {
            out.push(format!("object at index {i} has id {}", o.id));
        }
        let Some(class) = cat.get(o.class) else {
            out.push(format!("{} has unknown class {:?}", o.id, o.class));
            continue;
        };
        let f = o.flags;
        if class.is_room() {
            if o.location != o.id {
                out.push(format!("room {} must be its own location", o.id));
            }
            if o.support.is_some() {
                out.push(format!("room {} cannot be supported", o.id));
            }
            if f.iter().next().is_some() {
                out.push(format!("room {} carries state flags", o.id));
            }
            if !state.rooms().contains(&o.id) {
                out.push(format!("room {} missing from the room list", o.id));
            }
            continue;
        }
        if !resolves(o.location) || !state.is_room(o.location) {
            out.push(format!("{} located in non-room {}", o.id, o.location));
        }
        let pair = |a: StateFlag, b: StateFlag| f.has(a) as u8 + f.has(b) as u8;
        let openable = class.has(Property::Openable);
        match (openable, pair(StateFlag::Open, StateFlag::Closed)) {
            (true, 1) | (false, 0) => {}
            _ => out.push(format!("{} open/closed flags inconsistent", o.id)),
        }
        let switchable = class.has(Property::Switchable);
        match (switchable, pair(StateFlag::SwitchedOn, StateFlag::SwitchedOff)) {
            (true, 1) | (false, 0) => {}
            _ => out.push(format!("{} on/off flags inconsistent", o.id)),
        }
        if pair(StateFlag::Clean, StateFlag::Dirty) != 1 {
            out.push(format!("{} must be exactly one of clean/dirty", o.id));
        }
        if let Some(s) = o.support {
            if !resolves(s.holder) {
                out.push(format!("{} supported by unknown {}", o.id, s.holder));
                continue;
            }
            if s.holder == o.id {
                out.push(format!("{} supports itself", o.id));
            }
            let needed = match s.relation {
                Relation::On => Property::Surface,
                Relation::In => Property::Container,
            };
            if !state.has_property(s.holder, needed) {
                out.push(format!("{} held {:?} {} which is not {needed}", o.id, s.relation, s.holder));
            }
            if state.has_property(s.holder, Property::Grabbable) {
                out.push(format!("{} supported by portable {}", o.id, s.holder));
            }
            if state.objects()[s.holder.0 as usize].location != o.location {
                out.push(format!("{} and its holder {} are in different rooms", o.id, s.holder));
            }
        }
    }

    for r in state.rooms() {
        if !resolves(*r) || !state.is_room(*r) {
            out.push(format!("room list entry {r} is not a room"));
        }
    }

    let mut holders: BTreeMap<ObjectId, usize> = BTreeMap::new();
    for (i, a) in state.agents().iter().enumerate() {
        if a.id.0 as usize != i {
            out.push(format!("agent at index {i} has id {}", a.id));
        }
        if !resolves(a.location) || !state.is_room(a.location) {
            out.push(format!("{} located in non-room {}", a.id, a.location));
        }
        if a.holding.len() > HAND_CAPACITY {
            out.push(format!("{} holds {} objects", a.id, a.holding.len()));
        }
        for &h in &a.holding {
            *holders.entry(h).or_default() += 1;
            if !resolves(h) {
                out.push(format!("{} holds unknown {h}", a.id));
                continue;
            }
            let obj = &state.objects()[h.0 as usize];
            if !state.has_property(h, Property::Grabbable) {
                out.push(format!("{} holds non-grabbable {h}", a.id));
            }
            if obj.location != a.location {
                out.push(format!("{h} held by {} but located elsewhere", a.id));
            }
            if obj.support.is_some() {
                out.push(format!("{h} is both held and supported"));
            }
        }
        let posture_target = match a.posture {
            Posture::Standing => None,
            Posture::Sitting(o) => Some((o, Property::Sittable)),
            Posture::Lying(o) | Posture::Sleeping(o) => Some((o, Property::Lieable)),
        };
        if let Some((o, p)) = posture_target {
            if !resolves(o) || !state.has_property(o, p) {
                out.push(format!("{} rests on {o} which is not {p}", a.id));
            } else if state.objects()[o.0 as usize].location != a.location {
                out.push(format!("{} rests on {o} in another room", a.id));
            }
        }
        if let Some(f) = a.facing {
            if !resolves(f) {
                out.push(format!("{} faces unknown {f}", a.id));
            }
        }
    }
    for (obj, count) in holders {
        if count > 1 {
            out.push(format!("{obj} held {count} times"));
        }
    }
    out
}
