//! World state: object instances, agents and relations.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::catalog::{Catalog, ClassId, Layout, ObjectClass, Property};
use super::WorldError;

/// Object identifier (`Object_id`). Rooms are objects too.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

/// Agent identifier (`char_id`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "char{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateFlag {
    Open,
    Closed,
    SwitchedOn,
    SwitchedOff,
    Clean,
    Dirty,
}

impl StateFlag {
    pub const ALL: [StateFlag; 6] = [
        StateFlag::Open,
        StateFlag::Closed,
        StateFlag::SwitchedOn,
        StateFlag::SwitchedOff,
        StateFlag::Clean,
        StateFlag::Dirty,
    ];

    const fn bit(self) -> u8 {
        1 << self as u8
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Flags(u8);

impl Flags {
    pub fn has(self, f: StateFlag) -> bool {
        self.0 & f.bit() != 0
    }

    pub fn set(&mut self, f: StateFlag) {
        self.0 |= f.bit();
    }

    pub fn clear(&mut self, f: StateFlag) {
        self.0 &= !f.bit();
    }

    /// Sets `on` and clears `off`.
    pub fn toggle_to(&mut self, on: StateFlag, off: StateFlag) {
        self.set(on);
        self.clear(off);
    }

    pub fn iter(self) -> impl Iterator<Item = StateFlag> {
        StateFlag::ALL.into_iter().filter(move |f| self.has(*f))
    }
}

impl FromIterator<StateFlag> for Flags {
    fn from_iter<T: IntoIterator<Item = StateFlag>>(iter: T) -> Self {
        let mut flags = Flags::default();
        for f in iter {
            flags.set(f);
        }
        flags
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Relation {
    On,
    In,
}

impl Relation {
    pub fn preposition(self) -> &'static str {
        match self {
            Relation::On => "on",
            Relation::In => "in",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Support {
    pub relation: Relation,
    pub holder: ObjectId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObjectInstance {
    pub id: ObjectId,
    pub class: ClassId,
    pub flags: Flags,
    /// Room containing the object; rooms are their own location.
    pub location: ObjectId,
    pub support: Option<Support>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "on", rename_all = "snake_case")]
pub enum Posture {
    Standing,
    Sitting(ObjectId),
    Lying(ObjectId),
    Sleeping(ObjectId),
}

pub const HAND_CAPACITY: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub location: ObjectId,
    pub holding: Vec<ObjectId>,
    pub posture: Posture,
    /// Last object the agent turned to or interacted with.
    #[serde(default)]
    pub facing: Option<ObjectId>,
}

impl Agent {
    pub fn new(id: AgentId, location: ObjectId) -> Self {
        Agent { id, location, holding: Vec::new(), posture: Posture::Standing, facing: None }
    }

    pub fn holds(&self, obj: ObjectId) -> bool {
        self.holding.contains(&obj)
    }
}

/// Full symbolic snapshot of the household.
///
/// Objects are stored densely: `objects[i].id == ObjectId(i)`. Cloning is a
/// shallow copy of the catalog plus two small vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub(crate) catalog: Arc<Catalog>,
    pub(crate) objects: Vec<ObjectInstance>,
    pub(crate) agents: Vec<Agent>,
    pub(crate) rooms: Vec<ObjectId>,
    pub(crate) step_count: u64,
}

impl WorldState {
    /// Assembles a state from parts without validating it; see
    /// [`validate_state`](super::validate_state).
    pub fn from_parts(
        catalog: Arc<Catalog>,
        objects: Vec<ObjectInstance>,
        agents: Vec<Agent>,
        rooms: Vec<ObjectId>,
    ) -> Self {
        WorldState { catalog, objects, agents, rooms, step_count: 0 }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn catalog_arc(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn objects(&self) -> &[ObjectInstance] {
        &self.objects
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn rooms(&self) -> &[ObjectId] {
        &self.rooms
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectInstance> {
        self.objects.get(id.0 as usize)
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents.get(id.0 as usize)
    }

    pub(crate) fn object_mut(&mut self, id: ObjectId) -> &mut ObjectInstance {
        &mut self.objects[id.0 as usize]
    }

    pub(crate) fn agent_mut(&mut self, id: AgentId) -> &mut Agent {
        &mut self.agents[id.0 as usize]
    }

    /// Mutable access for building hand-crafted or corrupted fixtures.
    pub fn objects_mut(&mut self) -> &mut Vec<ObjectInstance> {
        &mut self.objects
    }

    pub fn agents_mut(&mut self) -> &mut Vec<Agent> {
        &mut self.agents
    }

    pub fn class_of(&self, id: ObjectId) -> Option<&ObjectClass> {
        self.object(id).and_then(|o| self.catalog.get(o.class))
    }

    /// Class name of an object, e.g. `"living room"`.
    pub fn name_of(&self, id: ObjectId) -> &str {
        self.class_of(id).map(|c| c.name.as_str()).unwrap_or("?")
    }

    pub fn has_property(&self, id: ObjectId, p: Property) -> bool {
        self.class_of(id).is_some_and(|c| c.has(p))
    }

    pub fn is_room(&self, id: ObjectId) -> bool {
        self.has_property(id, Property::Room)
    }

    /// Agent currently holding `obj`, if any.
    pub fn holder_agent(&self, obj: ObjectId) -> Option<AgentId> {
        self.agents.iter().find(|a| a.holds(obj)).map(|a| a.id)
    }

    /// All object ids of a class.
    pub fn instances_of(&self, class: ClassId) -> impl Iterator<Item = ObjectId> + '_ {
        self.objects.iter().filter(move |o| o.class == class).map(|o| o.id)
    }

    pub fn instances_named(&self, name: &str) -> Vec<ObjectId> {
        match self.catalog.class_id(name) {
            Some(c) => self.instances_of(c).collect(),
            None => Vec::new(),
        }
    }

    /// Room with the given class name.
    pub fn room_named(&self, name: &str) -> Option<ObjectId> {
        self.rooms.iter().copied().find(|r| self.name_of(*r) == name)
    }

    /// Objects directly supported by `holder`, in id order.
    pub fn supported_by(&self, holder: ObjectId) -> Vec<ObjectId> {
        self.objects.iter().filter(|o| o.support.is_some_and(|s| s.holder == holder)).map(|o| o.id).collect()
    }

    /// True when the object sits inside an openable container that is closed.
    pub fn inside_closed_container(&self, obj: ObjectId) -> bool {
        match self.object(obj).and_then(|o| o.support) {
            Some(Support { relation: Relation::In, holder }) => {
                self.object(holder).is_some_and(|h| h.flags.has(StateFlag::Closed))
            }
            _ => false,
        }
    }

    /// Adds an agent standing in `room` and returns its id.
    pub fn add_agent(&mut self, room: ObjectId) -> Result<AgentId, WorldError> {
        if !self.is_room(room) {
            return Err(WorldError::UnknownObject(room));
        }
        let id = AgentId(self.agents.len() as u32);
        self.agents.push(Agent::new(id, room));
        Ok(id)
    }

    /// Canonical structured-text form (pretty JSON, stable key order).
    pub fn to_canonical_string(&self) -> String {
        serde_json::to_string_pretty(&StateSnapshot::from(self)).expect("snapshot serializes")
    }

    pub fn from_canonical_str(text: &str) -> Result<Self, WorldError> {
        let snap: StateSnapshot = serde_json::from_str(text).map_err(|e| WorldError::Snapshot(e.to_string()))?;
        WorldState::try_from(snap)
    }
}

// --- canonical snapshot ---------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSnapshot {
    pub name: String,
    pub properties: Vec<Property>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSnapshot {
    pub id: ObjectId,
    pub class: String,
    pub flags: Vec<StateFlag>,
    pub location: ObjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Support>,
}

/// Self-contained serialized form of a [`WorldState`]. Carries the class
/// table for every class present so a snapshot can be loaded without the
/// original catalog file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub catalog: String,
    pub classes: Vec<ClassSnapshot>,
    pub rooms: Vec<ObjectId>,
    pub objects: Vec<ObjectSnapshot>,
    pub agents: Vec<Agent>,
    pub step_count: u64,
}

impl From<&WorldState> for StateSnapshot {
    fn from(s: &WorldState) -> Self {
        let mut used: Vec<ClassId> = s.objects.iter().map(|o| o.class).collect();
        used.sort();
        used.dedup();
        StateSnapshot {
            catalog: s.catalog.version_tag(),
            classes: used
                .into_iter()
                .map(|c| {
                    let class = s.catalog.class(c);
                    ClassSnapshot { name: class.name.clone(), properties: class.properties.iter().collect() }
                })
                .collect(),
            rooms: s.rooms.clone(),
            objects: s
                .objects
                .iter()
                .map(|o| ObjectSnapshot {
                    id: o.id,
                    class: s.catalog.class(o.class).name.clone(),
                    flags: o.flags.iter().collect(),
                    location: o.location,
                    support: o.support,
                })
                .collect(),
            agents: s.agents.clone(),
            step_count: s.step_count,
        }
    }
}

impl From<WorldState> for StateSnapshot {
    fn from(s: WorldState) -> Self {
        StateSnapshot::from(&s)
    }
}

impl TryFrom<StateSnapshot> for WorldState {
    type Error = WorldError;

    fn try_from(snap: StateSnapshot) -> Result<Self, Self::Error> {
        let (name, version) = match snap.catalog.rsplit_once('/') {
            Some((n, v)) => (n.to_string(), v.parse().unwrap_or(0)),
            None => (snap.catalog.clone(), 0),
        };
        let classes = snap
            .classes
            .iter()
            .map(|c| ObjectClass {
                name: c.name.clone(),
                properties: c.properties.iter().copied().collect(),
                spawn: Default::default(),
            })
            .collect();
        let catalog = Arc::new(Catalog::new(name, version, Layout::default(), classes)?);
        let mut objects = Vec::with_capacity(snap.objects.len());
        for (i, o) in snap.objects.into_iter().enumerate() {
            if o.id.0 as usize != i {
                return Err(WorldError::Snapshot(format!("object ids must be dense, found {}", o.id)));
            }
            let class = catalog
                .class_id(&o.class)
                .ok_or_else(|| WorldError::Snapshot(format!("unknown class `{}`", o.class)))?;
            objects.push(ObjectInstance {
                id: o.id,
                class,
                flags: o.flags.into_iter().collect(),
                location: o.location,
                support: o.support,
            });
        }
        Ok(WorldState { catalog, objects, agents: snap.agents, rooms: snap.rooms, step_count: snap.step_count })
    }
}

impl Serialize for WorldState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        StateSnapshot::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WorldState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let snap = StateSnapshot::deserialize(d)?;
        WorldState::try_from(snap).map_err(serde::de::Error::custom)
    }
}
