use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::catalog::{Catalog, ClassId, Property, SceneSize};
use super::state::{Agent, AgentId, Flags, ObjectId, ObjectInstance, Relation, StateFlag, Support, WorldState};

/// Probability a portable item starts dirty. Furniture always starts dirty.
const DIRTY_RATE: f64 = 0.3;

/// Samples a household scene with one agent. Equal `(seed, size)` pairs give
/// identical states.
pub fn sample_scene(catalog: &Arc<Catalog>, seed: u64, size: SceneSize) -> WorldState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout: Vec<&str> = catalog.layout_for(size).iter().map(String::as_str).collect();
    let mut objects: Vec<ObjectInstance> = Vec::new();
    let mut rooms = Vec::new();

    for name in &layout {
        let class = catalog.class_id(name).expect("layout rooms validated");
        let id = ObjectId(objects.len() as u32);
        rooms.push(id);
        objects.push(ObjectInstance { id, class, flags: Flags::default(), location: id, support: None });
    }
    let room_of = |name: &str| -> Option<ObjectId> { layout.iter().position(|r| *r == name).map(|i| rooms[i]) };

    // Fixed furniture first, so portable items can rest on it.
    let mut fixed: Vec<ClassId> = Vec::new();
    let mut portable: Vec<ClassId> = Vec::new();
    for (i, class) in catalog.classes().iter().enumerate() {
        if class.is_room() {
            continue;
        }
        if class.has(Property::Grabbable) {
            portable.push(ClassId(i as u16));
        } else {
            fixed.push(ClassId(i as u16));
        }
    }
    for class_id in fixed {
        let class = catalog.class(class_id);
        let Some(room) = class.spawn.rooms.iter().find_map(|r| room_of(r)) else {
            continue;
        };
        let id = ObjectId(objects.len() as u32);
        objects.push(ObjectInstance {
            id,
            class: class_id,
            flags: initial_flags(catalog, class_id, true),
            location: room,
            support: None,
        });
    }

    let mut items: Vec<ClassId> = portable.clone();
    if size == SceneSize::Large {
        for name in &catalog.layout().large_extra {
            if let Some(c) = catalog.class_id(name) {
                items.push(c);
            }
        }
    }
    for class_id in items {
        let class = catalog.class(class_id);
        let mut candidates: Vec<(Relation, ObjectId)> = Vec::new();
        for (relation, holders) in [(Relation::On, &class.spawn.on), (Relation::In, &class.spawn.inside)] {
            for holder in holders {
                let Some(hc) = catalog.class_id(holder) else { continue };
                candidates.extend(objects.iter().filter(|o| o.class == hc).map(|o| (relation, o.id)));
            }
        }
        let (location, support) = match candidates.choose(&mut rng) {
            Some(&(relation, holder)) => (objects[holder.0 as usize].location, Some(Support { relation, holder })),
            None => {
                let Some(room) = class.spawn.rooms.iter().find_map(|r| room_of(r)) else {
                    continue;
                };
                (room, None)
            }
        };
        let dirty = rng.gen_bool(DIRTY_RATE);
        let id = ObjectId(objects.len() as u32);
        objects.push(ObjectInstance {
            id,
            class: class_id,
            flags: initial_flags(catalog, class_id, dirty),
            location,
            support,
        });
    }

    let start = rooms[rng.gen_range(0..rooms.len())];
    let agents = vec![Agent::new(AgentId(0), start)];
    WorldState::from_parts(catalog.clone(), objects, agents, rooms)
}

fn initial_flags(catalog: &Catalog, class: ClassId, dirty: bool) -> Flags {
    let c = catalog.class(class);
    let mut f = Flags::default();
    if c.has(Property::Openable) {
        f.set(StateFlag::Closed);
    }
    if c.has(Property::Switchable) {
        f.set(StateFlag::SwitchedOff);
    }
    f.set(if dirty { StateFlag::Dirty } else { StateFlag::Clean });
    f
}
