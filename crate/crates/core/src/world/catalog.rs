//! Object catalog: class names, affordance properties and spawn rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WorldError;

/// The shipped household catalog.
pub const DEFAULT_CATALOG: &str = include_str!("../../data/catalog.toml");

/// Affordance of an object class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Grabbable,
    Surface,
    Container,
    Switchable,
    Openable,
    Sittable,
    Lieable,
    Drinkable,
    Eatable,
    Room,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::Grabbable,
        Property::Surface,
        Property::Container,
        Property::Switchable,
        Property::Openable,
        Property::Sittable,
        Property::Lieable,
        Property::Drinkable,
        Property::Eatable,
        Property::Room,
    ];

    const fn bit(self) -> u16 {
        1 << self as u16
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Grabbable => "grabbable",
            Property::Surface => "surface",
            Property::Container => "container",
            Property::Switchable => "switchable",
            Property::Openable => "openable",
            Property::Sittable => "sittable",
            Property::Lieable => "lieable",
            Property::Drinkable => "drinkable",
            Property::Eatable => "eatable",
            Property::Room => "room",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compact property set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PropertySet(u16);

impl PropertySet {
    pub fn has(self, p: Property) -> bool {
        self.0 & p.bit() != 0
    }

    pub fn insert(&mut self, p: Property) {
        self.0 |= p.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = Property> {
        Property::ALL.into_iter().filter(move |p| self.has(*p))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl FromIterator<Property> for PropertySet {
    fn from_iter<T: IntoIterator<Item = Property>>(iter: T) -> Self {
        let mut set = PropertySet::default();
        for p in iter {
            set.insert(p);
        }
        set
    }
}

impl Serialize for PropertySet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PropertySet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Vec::<Property>::deserialize(d)?.into_iter().collect())
    }
}

/// Index of a class inside its catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u16);

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpawnRule {
    /// Rooms in order of preference.
    #[serde(default)]
    pub rooms: Vec<String>,
    /// Holder classes the item may rest on.
    #[serde(default)]
    pub on: Vec<String>,
    /// Holder classes the item may rest inside.
    #[serde(default, rename = "in")]
    pub inside: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectClass {
    pub name: String,
    pub properties: PropertySet,
    #[serde(flatten)]
    pub spawn: SpawnRule,
}

impl ObjectClass {
    pub fn has(&self, p: Property) -> bool {
        self.properties.has(p)
    }

    pub fn is_room(&self) -> bool {
        self.has(Property::Room)
    }
}

/// Room layouts per scene size.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub small: Vec<String>,
    pub medium: Vec<String>,
    pub large: Vec<String>,
    #[serde(default)]
    pub large_extra: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneSize {
    Small,
    Medium,
    Large,
}

impl FromStr for SceneSize {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "small" => Ok(SceneSize::Small),
            "medium" => Ok(SceneSize::Medium),
            "large" => Ok(SceneSize::Large),
            other => Err(WorldError::Catalog(format!("unknown scene size `{other}`"))),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CatalogFile {
    name: String,
    version: u32,
    #[serde(default)]
    layout: Layout,
    #[serde(rename = "class")]
    classes: Vec<ObjectClass>,
}

/// A validated, immutable object catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    name: String,
    version: u32,
    layout: Layout,
    classes: Vec<ObjectClass>,
    by_name: BTreeMap<String, ClassId>,
}

impl Catalog {
    /// Parses and validates a catalog from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self, WorldError> {
        let file: CatalogFile = toml::from_str(text).map_err(|e| WorldError::Catalog(e.to_string()))?;
        Self::new(file.name, file.version, file.layout, file.classes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| WorldError::Catalog(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The catalog shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_toml_str(DEFAULT_CATALOG).expect("builtin catalog is valid")
    }

    pub fn new(name: String, version: u32, layout: Layout, classes: Vec<ObjectClass>) -> Result<Self, WorldError> {
        if classes.len() > u16::MAX as usize {
            return Err(WorldError::Catalog("too many classes".into()));
        }
        let mut by_name = BTreeMap::new();
        for (i, class) in classes.iter().enumerate() {
            if class.name.trim().is_empty() {
                return Err(WorldError::Catalog(format!("class #{i} has an empty name")));
            }
            if by_name.insert(class.name.clone(), ClassId(i as u16)).is_some() {
                return Err(WorldError::Catalog(format!("duplicate class `{}`", class.name)));
            }
            if class.is_room() && class.properties.len() > 1 {
                return Err(WorldError::Catalog(format!("room class `{}` cannot carry other properties", class.name)));
            }
        }
        let catalog = Catalog { name, version, layout, classes, by_name };
        catalog.check_references()?;
        Ok(catalog)
    }

    fn check_references(&self) -> Result<(), WorldError> {
        let room_ref = |name: &str| match self.class_by_name(name) {
            Some(c) if c.is_room() => Ok(()),
            _ => Err(WorldError::Catalog(format!("`{name}` is not a room class"))),
        };
        for name in self.layout.small.iter().chain(&self.layout.medium).chain(&self.layout.large) {
            room_ref(name)?;
        }
        for name in &self.layout.large_extra {
            if self.class_by_name(name).is_none() {
                return Err(WorldError::Catalog(format!("unknown extra class `{name}`")));
            }
        }
        for class in &self.classes {
            for room in &class.spawn.rooms {
                room_ref(room)?;
            }
            for holder in &class.spawn.on {
                match self.class_by_name(holder) {
                    Some(h) if h.has(Property::Surface) && !h.has(Property::Grabbable) => {}
                    _ => {
                        return Err(WorldError::Catalog(format!(
                            "`{}` spawns on `{holder}`, which is not a fixed surface",
                            class.name
                        )))
                    }
                }
            }
            for holder in &class.spawn.inside {
                match self.class_by_name(holder) {
                    Some(h) if h.has(Property::Container) && !h.has(Property::Grabbable) => {}
                    _ => {
                        return Err(WorldError::Catalog(format!(
                            "`{}` spawns in `{holder}`, which is not a fixed container",
                            class.name
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    /// `name/version`, recorded alongside every experience.
    pub fn version_tag(&self) -> String {
        format!("{}/{}", self.name, self.version)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn classes(&self) -> &[ObjectClass] {
        &self.classes
    }

    pub fn class(&self, id: ClassId) -> &ObjectClass {
        &self.classes[id.0 as usize]
    }

    pub fn get(&self, id: ClassId) -> Option<&ObjectClass> {
        self.classes.get(id.0 as usize)
    }

    pub fn class_id(&self, name: &str) -> Option<ClassId> {
        self.by_name.get(name).copied()
    }

    pub fn class_by_name(&self, name: &str) -> Option<&ObjectClass> {
        self.class_id(name).map(|id| self.class(id))
    }

    pub fn room_names(&self) -> BTreeSet<&str> {
        self.classes.iter().filter(|c| c.is_room()).map(|c| c.name.as_str()).collect()
    }

    pub fn layout_for(&self, size: SceneSize) -> &[String] {
        match size {
            SceneSize::Small => &self.layout.small,
            SceneSize::Medium => &self.layout.medium,
            SceneSize::Large => &self.layout.large,
        }
    }

    /// Serializes back to TOML.
    pub fn to_toml_string(&self) -> String {
        let file = CatalogFile {
            name: self.name.clone(),
            version: self.version,
            layout: self.layout.clone(),
            classes: self.classes.clone(),
        };
        toml::to_string(&file).expect("catalog serializes")
    }
}
