//! Goal predicates, activities and the activity library.
//!
//! Class-name arguments are existential: `ON(fork, table)` holds when some
//! fork rests on some table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{AgentId, Catalog, ClassId, ObjectId, ObjectInstance, Posture, Relation, StateFlag, WorldState};

/// The shipped activity library.
pub const DEFAULT_ACTIVITIES: &str = include_str!("../data/activities.toml");

#[derive(Debug, Error)]
pub enum GoalError {
    #[error("cannot parse predicate `{0}`")]
    Syntax(String),
    #[error("{kind} takes {expected} argument(s), got {got}")]
    Arity { kind: PredicateKind, expected: usize, got: usize },
    #[error("unresolvable argument `{0}`")]
    Unresolvable(String),
    #[error("unknown class `{name}` in activity `{activity}`")]
    UnknownClass { activity: String, name: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("goal must not be empty")]
    EmptyGoal,
    #[error("duplicate predicate {0}")]
    DuplicatePredicate(Predicate),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PredicateKind {
    On,
    In,
    Open,
    Closed,
    SwitchedOn,
    SwitchedOff,
    Holds,
    Sitting,
    Clean,
}

impl PredicateKind {
    pub const ALL: [PredicateKind; 9] = [
        PredicateKind::On,
        PredicateKind::In,
        PredicateKind::Open,
        PredicateKind::Closed,
        PredicateKind::SwitchedOn,
        PredicateKind::SwitchedOff,
        PredicateKind::Holds,
        PredicateKind::Sitting,
        PredicateKind::Clean,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateKind::On => "ON",
            PredicateKind::In => "IN",
            PredicateKind::Open => "OPEN",
            PredicateKind::Closed => "CLOSED",
            PredicateKind::SwitchedOn => "SWITCHED_ON",
            PredicateKind::SwitchedOff => "SWITCHED_OFF",
            PredicateKind::Holds => "HOLDS",
            PredicateKind::Sitting => "SITTING",
            PredicateKind::Clean => "CLEAN",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            PredicateKind::On | PredicateKind::In | PredicateKind::Holds | PredicateKind::Sitting => 2,
            _ => 1,
        }
    }

    /// Kinds whose first argument is an agent.
    pub fn takes_agent(self) -> bool {
        matches!(self, PredicateKind::Holds | PredicateKind::Sitting)
    }
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredicateKind {
    type Err = GoalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PredicateKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| GoalError::Syntax(s.to_string()))
    }
}

/// A predicate argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    /// Any instance of the named class.
    Class(String),
    /// A specific object, written `#id`.
    Object(ObjectId),
    /// `agent` (any agent) or `charN`.
    Agent(Option<AgentId>),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Class(c) => f.write_str(c),
            Term::Object(o) => write!(f, "#{}", o.0),
            Term::Agent(None) => f.write_str("agent"),
            Term::Agent(Some(a)) => write!(f, "char{}", a.0),
        }
    }
}

impl Term {
    fn parse(s: &str, agent_slot: bool) -> Result<Term, GoalError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(GoalError::Syntax(s.to_string()));
        }
        if agent_slot {
            if s == "agent" {
                return Ok(Term::Agent(None));
            }
            if let Some(n) = s.strip_prefix("char").and_then(|n| n.parse().ok()) {
                return Ok(Term::Agent(Some(AgentId(n))));
            }
            return Err(GoalError::Syntax(format!("expected agent, got `{s}`")));
        }
        if let Some(n) = s.strip_prefix('#').and_then(|n| n.parse().ok()) {
            return Ok(Term::Object(ObjectId(n)));
        }
        Ok(Term::Class(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub kind: PredicateKind,
    pub args: Vec<Term>,
}

impl Predicate {
    pub fn new(kind: PredicateKind, args: Vec<Term>) -> Result<Self, GoalError> {
        if args.len() != kind.arity() {
            return Err(GoalError::Arity { kind, expected: kind.arity(), got: args.len() });
        }
        for (i, a) in args.iter().enumerate() {
            let agent_slot = i == 0 && kind.takes_agent();
            if agent_slot != matches!(a, Term::Agent(_)) {
                return Err(GoalError::Syntax(format!("{kind}: bad argument {a}")));
            }
        }
        Ok(Predicate { kind, args })
    }

    /// Class names mentioned by the predicate.
    pub fn class_names(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|a| match a {
            Term::Class(c) => Some(c.as_str()),
            _ => None,
        })
    }

    /// Resolves class names against the state's catalog and scene.
    pub fn bind(&self, state: &WorldState) -> Result<BoundPredicate, GoalError> {
        let thing = |t: &Term| -> Result<Thing, GoalError> {
            match t {
                Term::Class(name) => {
                    let id = state.catalog().class_id(name).ok_or_else(|| GoalError::Unresolvable(name.clone()))?;
                    if state.instances_of(id).next().is_none() {
                        return Err(GoalError::Unresolvable(name.clone()));
                    }
                    Ok(Thing::Class(id))
                }
                Term::Object(o) => match state.object(*o) {
                    Some(_) => Ok(Thing::Object(*o)),
                    None => Err(GoalError::Unresolvable(t.to_string())),
                },
                Term::Agent(_) => Err(GoalError::Unresolvable(t.to_string())),
            }
        };
        let (agent, rest) = if self.kind.takes_agent() {
            let agent = match &self.args[0] {
                Term::Agent(a) => *a,
                other => return Err(GoalError::Unresolvable(other.to_string())),
            };
            if let Some(a) = agent {
                if state.agent(a).is_none() {
                    return Err(GoalError::Unresolvable(self.args[0].to_string()));
                }
            }
            (agent, &self.args[1..])
        } else {
            (None, &self.args[..])
        };
        let first = thing(&rest[0])?;
        let second = rest.get(1).map(thing).transpose()?;
        Ok(BoundPredicate { kind: self.kind, agent, first, second })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Predicate {
    type Err = GoalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, rest) = s.split_once('(').ok_or_else(|| GoalError::Syntax(s.to_string()))?;
        let body = rest.strip_suffix(')').ok_or_else(|| GoalError::Syntax(s.to_string()))?;
        let kind: PredicateKind = head.trim().parse()?;
        let raw: Vec<&str> = body.split(',').collect();
        if raw.len() != kind.arity() {
            return Err(GoalError::Arity { kind, expected: kind.arity(), got: raw.len() });
        }
        let args = raw
            .iter()
            .enumerate()
            .map(|(i, a)| Term::parse(a, i == 0 && kind.takes_agent()))
            .collect::<Result<Vec<_>, _>>()?;
        Predicate::new(kind, args)
    }
}

impl Serialize for Predicate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Predicate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thing {
    Class(ClassId),
    Object(ObjectId),
}

impl Thing {
    fn matches(self, o: &ObjectInstance) -> bool {
        match self {
            Thing::Class(c) => o.class == c,
            Thing::Object(id) => o.id == id,
        }
    }
}

/// A predicate with class names resolved, cheap to evaluate repeatedly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundPredicate {
    pub kind: PredicateKind,
    pub agent: Option<AgentId>,
    pub first: Thing,
    pub second: Option<Thing>,
}

impl BoundPredicate {
    pub fn holds(&self, state: &WorldState) -> bool {
        let objects = state.objects();
        let flag = |f: StateFlag| objects.iter().any(|o| self.first.matches(o) && o.flags.has(f));
        let related = |rel: Relation| {
            let second = self.second.expect("binary predicate");
            objects.iter().any(|o| {
                self.first.matches(o)
                    && o.support.is_some_and(|s| s.relation == rel && second.matches(&objects[s.holder.0 as usize]))
            })
        };
        let agents = state.agents().iter().filter(|a| self.agent.is_none_or(|id| a.id == id));
        match self.kind {
            PredicateKind::On => related(Relation::On),
            PredicateKind::In => related(Relation::In),
            PredicateKind::Open => flag(StateFlag::Open),
            PredicateKind::Closed => flag(StateFlag::Closed),
            PredicateKind::SwitchedOn => flag(StateFlag::SwitchedOn),
            PredicateKind::SwitchedOff => flag(StateFlag::SwitchedOff),
            PredicateKind::Clean => flag(StateFlag::Clean),
            PredicateKind::Holds => {
                let mut agents = agents;
                agents.any(|a| a.holding.iter().any(|h| self.first.matches(&objects[h.0 as usize])))
            }
            PredicateKind::Sitting => {
                let mut agents = agents;
                agents.any(|a| match a.posture {
                    Posture::Sitting(o) => self.first.matches(&objects[o.0 as usize]),
                    _ => false,
                })
            }
        }
    }
}

/// Whether `p` holds in `state`.
pub fn evaluate_predicate(state: &WorldState, p: &Predicate) -> Result<bool, GoalError> {
    Ok(p.bind(state)?.holds(state))
}

/// A set of predicates describing a target world state.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Goal {
    predicates: BTreeSet<Predicate>,
}

impl Goal {
    /// Builds a non-empty goal; duplicates are rejected.
    pub fn new(preds: impl IntoIterator<Item = Predicate>) -> Result<Self, GoalError> {
        let mut predicates = BTreeSet::new();
        for p in preds {
            if predicates.contains(&p) {
                return Err(GoalError::DuplicatePredicate(p));
            }
            predicates.insert(p);
        }
        if predicates.is_empty() {
            return Err(GoalError::EmptyGoal);
        }
        Ok(Goal { predicates })
    }

    /// Any subset of a goal, including the empty one.
    pub fn from_set(predicates: BTreeSet<Predicate>) -> Self {
        Goal { predicates }
    }

    pub fn predicates(&self) -> &BTreeSet<Predicate> {
        &self.predicates
    }

    pub fn iter(&self) -> impl Iterator<Item = &Predicate> {
        self.predicates.iter()
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn contains(&self, p: &Predicate) -> bool {
        self.predicates.contains(p)
    }

    pub fn is_subset(&self, other: &Goal) -> bool {
        self.predicates.is_subset(&other.predicates)
    }

    pub fn difference(&self, other: &BTreeSet<Predicate>) -> Goal {
        Goal { predicates: self.predicates.difference(other).cloned().collect() }
    }

    pub fn class_names(&self) -> BTreeSet<&str> {
        self.predicates.iter().flat_map(|p| p.class_names()).collect()
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.predicates.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(";"))
    }
}

/// The predicates of `goal` that hold in `state`.
pub fn satisfied_subset(state: &WorldState, goal: &Goal) -> Result<BTreeSet<Predicate>, GoalError> {
    let mut out = BTreeSet::new();
    for p in goal.iter() {
        if evaluate_predicate(state, p)? {
            out.insert(p.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activity {
    pub name: String,
    pub goal: Goal,
    pub relevant_classes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Activity {
    /// Relevant classes that are rooms in `catalog`.
    pub fn rooms<'a>(&'a self, catalog: &'a Catalog) -> impl Iterator<Item = &'a str> + 'a {
        self.relevant_classes
            .iter()
            .map(String::as_str)
            .filter(|c| catalog.class_by_name(c).is_some_and(|c| c.is_room()))
    }

    /// Relevant classes that are not rooms.
    pub fn items<'a>(&'a self, catalog: &'a Catalog) -> impl Iterator<Item = &'a str> + 'a {
        self.relevant_classes
            .iter()
            .map(String::as_str)
            .filter(|c| catalog.class_by_name(c).is_some_and(|c| !c.is_room()))
    }

    pub fn is_relevant(&self, class: &str) -> bool {
        self.relevant_classes.iter().any(|c| c == class)
    }
}

#[derive(Debug, Deserialize)]
struct LibraryFile {
    #[serde(default)]
    #[allow(dead_code)]
    version: u32,
    #[serde(default, rename = "activity")]
    activities: Vec<ActivityEntry>,
}

#[derive(Debug, Deserialize)]
struct ActivityEntry {
    name: toml::Spanned<String>,
    goal: toml::Spanned<Vec<String>>,
    relevant: Vec<String>,
    description: Option<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses an activity library and checks every class against `catalog`.
pub fn parse_activity_library(text: &str, catalog: &Catalog) -> Result<Vec<Activity>, GoalError> {
    let file: LibraryFile = toml::from_str(text).map_err(|e| GoalError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(file.activities.len());
    for entry in file.activities {
        let line = line_of(text, entry.name.span().start);
        let name = entry.name.into_inner();
        if let Some(prev) = seen.insert(name.clone(), line) {
            return Err(GoalError::Parse {
                line,
                message: format!("duplicate activity `{name}` (first defined on line {prev})"),
            });
        }
        let goal_line = line_of(text, entry.goal.span().start);
        let preds = entry
            .goal
            .into_inner()
            .iter()
            .map(|p| p.parse::<Predicate>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GoalError::Parse { line: goal_line, message: e.to_string() })?;
        let goal = Goal::new(preds).map_err(|e| GoalError::Parse { line: goal_line, message: e.to_string() })?;
        for class in &entry.relevant {
            if catalog.class_by_name(class).is_none() {
                return Err(GoalError::UnknownClass { activity: name, name: class.clone() });
            }
        }
        for class in goal.class_names() {
            if catalog.class_by_name(class).is_none() {
                return Err(GoalError::UnknownClass { activity: name, name: class.to_string() });
            }
            if !entry.relevant.iter().any(|r| r == class) {
                return Err(GoalError::Parse {
                    line: goal_line,
                    message: format!("`{class}` used in goal of `{name}` but not listed as relevant"),
                });
            }
        }
        out.push(Activity { name, goal, relevant_classes: entry.relevant, description: entry.description });
    }
    Ok(out)
}

pub fn load_activity_library(path: impl AsRef<Path>, catalog: &Catalog) -> Result<Vec<Activity>, GoalError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GoalError::Io(format!("{}: {e}", path.display())))?;
    parse_activity_library(&text, catalog)
}

/// The shipped library, parsed against `catalog`.
pub fn builtin_activities(catalog: &Catalog) -> Vec<Activity> {
    parse_activity_library(DEFAULT_ACTIVITIES, catalog).expect("builtin library is valid")
}

/// Distinct rooms touched by a library.
pub fn rooms_spanned<'a>(library: &'a [Activity], catalog: &'a Catalog) -> BTreeSet<&'a str> {
    library.iter().flat_map(|a| a.rooms(catalog)).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::world::{apply_action, sample_scene, ActionStep, Relation, SceneSize, Support, Verb};

    fn p(s: &str) -> Predicate {
        s.parse().unwrap()
    }

    fn scene() -> WorldState {
        sample_scene(&Arc::new(Catalog::builtin()), 3, SceneSize::Medium)
    }

    #[test]
    fn predicate_text_round_trip() {
        for s in ["ON(fork, table)", "OPEN(coffee maker)", "SITTING(agent, sofa)", "HOLDS(char1, #4)"] {
            assert_eq!(p(s).to_string(), s);
        }
        assert!("ON(fork)".parse::<Predicate>().is_err());
        assert!("HOLDS(cup, plate)".parse::<Predicate>().is_err());
        assert!("FLYING(cup)".parse::<Predicate>().is_err());
    }

    #[test]
    fn fresh_fridge_is_not_open() {
        let s = scene();
        assert!(!evaluate_predicate(&s, &p("OPEN(fridge)")).unwrap());
        assert!(evaluate_predicate(&s, &p("CLOSED(fridge)")).unwrap());
    }

    #[test]
    fn unresolvable_class_errors() {
        let s = scene();
        assert!(matches!(evaluate_predicate(&s, &p("OPEN(spaceship)")), Err(GoalError::Unresolvable(_))));
        assert!(evaluate_predicate(&s, &p("HOLDS(char7, cup)")).is_err());
    }

    #[test]
    fn on_after_put() {
        let mut s = scene();
        let fork = s.instances_named("fork")[0];
        let table = s.instances_named("table")[0];
        let room = s.object(table).unwrap().location;
        s.objects_mut()[fork.0 as usize].support = None;
        s.objects_mut()[fork.0 as usize].location = room;
        s.agents_mut()[0].location = room;
        let s = apply_action(&s, &ActionStep::unary(crate::world::AgentId(0), Verb::Grab, fork)).unwrap();
        assert!(!evaluate_predicate(&s, &p("ON(fork, table)")).unwrap());
        let s = apply_action(&s, &ActionStep::binary(crate::world::AgentId(0), Verb::Put, fork, table)).unwrap();
        assert!(evaluate_predicate(&s, &p("ON(fork, table)")).unwrap());
        let goal = Goal::new([p("ON(fork, table)"), p("ON(plate, table)")]).unwrap();
        let sat = satisfied_subset(&s, &goal).unwrap();
        assert_eq!(sat, BTreeSet::from([p("ON(fork, table)")]));
    }

    #[test]
    fn dust_in_trash_can() {
        let mut s = scene();
        let dust = s.instances_named("dust")[0];
        let can = s.instances_named("trash can")[0];
        let goal = Goal::new([p("IN(dust, trash can)")]).unwrap();
        assert!(satisfied_subset(&s, &goal).unwrap().is_empty());
        let kitchen = s.object(can).unwrap().location;
        s.objects_mut()[dust.0 as usize].location = kitchen;
        s.objects_mut()[dust.0 as usize].support = Some(Support { relation: Relation::In, holder: can });
        assert_eq!(satisfied_subset(&s, &goal).unwrap().len(), 1);
    }

    #[test]
    fn set_up_table_unsatisfied_on_fresh_scenes() {
        let c = Arc::new(Catalog::builtin());
        let lib = builtin_activities(&c);
        let act = lib.iter().find(|a| a.name == "set up table").unwrap();
        for seed in 0..50 {
            let s = sample_scene(&c, seed, SceneSize::Medium);
            assert!(satisfied_subset(&s, &act.goal).unwrap().is_empty());
        }
    }

    #[test]
    fn satisfied_subset_matches_per_predicate_loop() {
        let c = Arc::new(Catalog::builtin());
        let lib = builtin_activities(&c);
        for seed in 0..30 {
            let s = sample_scene(&c, seed, SceneSize::Large);
            for act in &lib {
                let sat = satisfied_subset(&s, &act.goal).unwrap();
                for pred in act.goal.iter() {
                    let direct = evaluate_predicate(&s, pred).unwrap();
                    assert_eq!(sat.contains(pred), direct, "{} / {pred}", act.name);
                }
            }
        }
    }

    #[test]
    fn evaluation_does_not_mutate() {
        let s = scene();
        let before = s.to_canonical_string();
        let c = Catalog::builtin();
        for act in builtin_activities(&c) {
            satisfied_subset(&s, &act.goal).unwrap();
        }
        assert_eq!(s.to_canonical_string(), before);
    }

    #[test]
    fn builtin_library_contents() {
        let c = Catalog::builtin();
        let lib = builtin_activities(&c);
        assert!(lib.len() >= 50);
        assert!(rooms_spanned(&lib, &c).len() >= 5);
        let table = lib.iter().find(|a| a.name == "set up table").unwrap();
        assert!(table.goal.contains(&p("ON(fork, table)")));
        assert!(table.goal.contains(&p("ON(plate, table)")));
        let tv = lib.iter().find(|a| a.name == "watch TV").unwrap();
        assert!(tv.goal.contains(&p("SWITCHED_ON(TV)")));
        assert!(tv.goal.contains(&p("SITTING(agent, sofa)")));
        assert_eq!(tv.relevant_classes, ["living room", "sofa", "TV"]);
    }

    #[test]
    fn duplicate_activity_reports_line() {
        let text = "version = 1\n\n[[activity]]\nname = \"a\"\ngoal = [\"OPEN(fridge)\"]\nrelevant = [\"fridge\"]\n\n[[activity]]\nname = \"a\"\ngoal = [\"OPEN(fridge)\"]\nrelevant = [\"fridge\"]\n";
        match parse_activity_library(text, &Catalog::builtin()) {
            Err(GoalError::Parse { line, message }) => {
                assert_eq!(line, 9);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_report_line() {
        let text = "version = 1\n[[activity]]\nname = \"a\"\ngoal = [\"OPEN(fridge\"]\nrelevant = [\"fridge\"]\n";
        match parse_activity_library(text, &Catalog::builtin()) {
            Err(GoalError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let text = "version = 1\n[[activity]\n";
        assert!(matches!(parse_activity_library(text, &Catalog::builtin()), Err(GoalError::Parse { line: 2, .. })));
    }

    #[test]
    fn unknown_class_rejected() {
        let text = "[[activity]]\nname = \"a\"\ngoal = [\"OPEN(hovercraft)\"]\nrelevant = [\"hovercraft\"]\n";
        assert!(matches!(parse_activity_library(text, &Catalog::builtin()), Err(GoalError::UnknownClass { .. })));
    }
}
