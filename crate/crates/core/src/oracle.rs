//! Independent replay of recorded experiences, used to audit eval answers.
//!
//! The replay keeps its own minimal bookkeeping (rooms, supports, hands,
//! postures, flags) and never calls the transition function in `world`, so a
//! bug there shows up as a mismatch here rather than being copied into both
//! sides.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::compile::{EvalExample, EvalSuite, EvalTask};
use crate::experience::ExperienceRecord;
use crate::goals::{Activity, Predicate, PredicateKind, Term};
use crate::world::{split_plan_text, ActionStep, AgentId, ObjectId, Posture, StateFlag, Verb, WorldState};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub id: String,
    pub task: EvalTask,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    /// Examples checked per task.
    pub checked: BTreeMap<EvalTask, usize>,
    pub mismatches: Vec<Mismatch>,
}

impl OracleReport {
    pub fn checked_total(&self) -> usize {
        self.checked.values().sum()
    }
}

#[derive(Debug, Clone)]
struct Thing {
    class: String,
    room: ObjectId,
    /// `(inside, holder)`.
    support: Option<(bool, ObjectId)>,
    open: bool,
    closed: bool,
    on: bool,
    off: bool,
    clean: bool,
}

#[derive(Debug, Clone)]
struct Body {
    room: ObjectId,
    hands: Vec<ObjectId>,
    seat: Option<ObjectId>,
}

/// Minimal household bookkeeping.
#[derive(Debug, Clone)]
struct Replay {
    things: Vec<Thing>,
    bodies: Vec<Body>,
    /// Room sequence per object, consecutive repeats removed.
    paths: BTreeMap<ObjectId, Vec<ObjectId>>,
}

impl Replay {
    fn new(s: &WorldState) -> Self {
        let things = s
            .objects()
            .iter()
            .map(|o| Thing {
                class: s.name_of(o.id).to_string(),
                room: o.location,
                support: o.support.map(|sp| (sp.relation == crate::world::Relation::In, sp.holder)),
                open: o.flags.has(StateFlag::Open),
                closed: o.flags.has(StateFlag::Closed),
                on: o.flags.has(StateFlag::SwitchedOn),
                off: o.flags.has(StateFlag::SwitchedOff),
                clean: o.flags.has(StateFlag::Clean),
            })
            .collect();
        let bodies = s
            .agents()
            .iter()
            .map(|a| Body {
                room: a.location,
                hands: a.holding.clone(),
                seat: match a.posture {
                    Posture::Sitting(o) => Some(o),
                    _ => None,
                },
            })
            .collect();
        let paths = s.objects().iter().filter(|o| !s.is_room(o.id)).map(|o| (o.id, vec![o.location])).collect();
        Replay { things, bodies, paths }
    }

    fn set_room(&mut self, obj: ObjectId, room: ObjectId) {
        self.things[obj.0 as usize].room = room;
        let p = self.paths.get_mut(&obj).expect("non-room object");
        if p.last() != Some(&room) {
            p.push(room);
        }
    }

    fn step(&mut self, st: &ActionStep) {
        let who = st.agent.0 as usize;
        let a = st.args.first().copied();
        match st.verb {
            Verb::Walk | Verb::Run | Verb::Find => {
                let t = a.unwrap();
                let dest = if st.verb == Verb::Find { self.things[t.0 as usize].room } else { t };
                self.bodies[who].room = dest;
                for h in self.bodies[who].hands.clone() {
                    self.set_room(h, dest);
                }
            }
            Verb::Grab => {
                let t = a.unwrap();
                self.things[t.0 as usize].support = None;
                let here = self.bodies[who].room;
                self.set_room(t, here);
                self.bodies[who].hands.push(t);
            }
            Verb::Put | Verb::PutIn => {
                let (t, h) = (a.unwrap(), st.args[1]);
                self.things[t.0 as usize].support = Some((st.verb == Verb::PutIn, h));
                let room = self.things[h.0 as usize].room;
                self.set_room(t, room);
                self.bodies[who].hands.retain(|x| *x != t);
            }
            Verb::Drop => {
                let t = a.unwrap();
                self.things[t.0 as usize].support = None;
                self.bodies[who].hands.retain(|x| *x != t);
            }
            Verb::Sit => self.bodies[who].seat = a,
            Verb::StandUp | Verb::Lie => self.bodies[who].seat = None,
            Verb::Open | Verb::Close => {
                let t = &mut self.things[a.unwrap().0 as usize];
                t.open = st.verb == Verb::Open;
                t.closed = !t.open;
            }
            Verb::SwitchOn | Verb::SwitchOff => {
                let t = &mut self.things[a.unwrap().0 as usize];
                t.on = st.verb == Verb::SwitchOn;
                t.off = !t.on;
            }
            Verb::Wipe | Verb::Wash | Verb::Rinse | Verb::Scrub => self.things[a.unwrap().0 as usize].clean = true,
            _ => {}
        }
    }

    fn run(s: &WorldState, steps: &[ActionStep]) -> Self {
        let mut r = Replay::new(s);
        for st in steps {
            r.step(st);
        }
        r
    }

    fn matches(&self, term: &Term, obj: ObjectId) -> bool {
        match term {
            Term::Class(c) => &self.things[obj.0 as usize].class == c,
            Term::Object(o) => *o == obj,
            Term::Agent(_) => false,
        }
    }

    fn any(&self, term: &Term, f: impl Fn(&Thing) -> bool) -> bool {
        (0..self.things.len()).any(|i| self.matches(term, ObjectId(i as u32)) && f(&self.things[i]))
    }

    fn holds(&self, p: &Predicate) -> bool {
        let agents = |t: &Term| -> Vec<usize> {
            match t {
                Term::Agent(Some(AgentId(n))) => vec![*n as usize],
                _ => (0..self.bodies.len()).collect(),
            }
        };
        match p.kind {
            PredicateKind::On | PredicateKind::In => {
                let inside = p.kind == PredicateKind::In;
                self.any(&p.args[0], |t| t.support.is_some_and(|(i, h)| i == inside && self.matches(&p.args[1], h)))
            }
            PredicateKind::Open => self.any(&p.args[0], |t| t.open),
            PredicateKind::Closed => self.any(&p.args[0], |t| t.closed),
            PredicateKind::SwitchedOn => self.any(&p.args[0], |t| t.on),
            PredicateKind::SwitchedOff => self.any(&p.args[0], |t| t.off),
            PredicateKind::Clean => self.any(&p.args[0], |t| t.clean),
            PredicateKind::Holds => agents(&p.args[0])
                .into_iter()
                .any(|a| self.bodies[a].hands.iter().any(|h| self.matches(&p.args[1], *h))),
            PredicateKind::Sitting => {
                agents(&p.args[0]).into_iter().any(|a| self.bodies[a].seat.is_some_and(|s| self.matches(&p.args[1], s)))
            }
        }
    }

    fn only_instance(&self, class: &str) -> Option<ObjectId> {
        let hits: Vec<usize> = (0..self.things.len()).filter(|&i| self.things[i].class == class).collect();
        (hits.len() == 1).then(|| ObjectId(hits[0] as u32))
    }
}

fn field<'a>(e: &'a EvalExample, key: &str) -> &'a str {
    e.fields.get(key).map(String::as_str).unwrap_or("")
}

/// Recomputes the gold answer of `e` from its source experience.
fn recompute(e: &EvalExample, src: &ExperienceRecord, library: &[Activity]) -> Result<String, String> {
    match e.task {
        EvalTask::CountingQa => {
            let t = src.as_explore().ok_or("source is not a trace")?;
            let r = Replay::run(&t.initial_state, &t.steps);
            let holder = r.only_instance(field(e, "location")).ok_or("location is ambiguous")?;
            let inside = field(e, "preposition") == "in";
            let n = r.things.iter().filter(|t| t.support == Some((inside, holder))).count();
            Ok(n.to_string())
        }
        EvalTask::ObjectPathTrackingEval | EvalTask::ObjectLocationQa => {
            let t = src.as_explore().ok_or("source is not a trace")?;
            let r = Replay::run(&t.initial_state, &t.steps);
            let obj = r.only_instance(field(e, "object")).ok_or("object is ambiguous")?;
            let names: Vec<&str> = r.paths[&obj].iter().map(|x| r.things[x.0 as usize].class.as_str()).collect();
            if e.task == EvalTask::ObjectPathTrackingEval {
                return Ok(names.join(", "));
            }
            let reference = field(e, "reference_room");
            let at: Vec<usize> = (0..names.len()).filter(|&i| names[i] == reference).collect();
            let [i] = at[..] else { return Err(format!("{reference} occurs {} times", at.len())) };
            let j = match field(e, "preposition") {
                "before" => i.checked_sub(1),
                "after" => Some(i + 1).filter(|&j| j < names.len()),
                p => return Err(format!("bad preposition {p}")),
            };
            j.map(|j| names[j].to_string()).ok_or_else(|| "no neighbouring room".into())
        }
        EvalTask::ActivityRecognitionQa | EvalTask::ActivityInferenceQa => {
            let ep = src.as_plan().ok_or("source is not a plan")?;
            if e.task == EvalTask::ActivityRecognitionQa {
                let text = field(e, "plan");
                let mut state = Replay::new(&ep.initial_state);
                let lines = split_plan_text(text);
                if lines.len() != ep.steps.len() {
                    return Err(format!("plan text has {} steps, source has {}", lines.len(), ep.steps.len()));
                }
                for (line, st) in lines.iter().zip(&ep.steps) {
                    let (verb, names) = crate::world::parse_action_text(line).ok_or("unparsable step")?;
                    let want: Vec<&str> = st.args.iter().map(|a| state.things[a.0 as usize].class.as_str()).collect();
                    if verb != st.verb || names != want {
                        return Err(format!("step {line:?} does not match source"));
                    }
                    state.step(st);
                }
            }
            let end = Replay::run(&ep.initial_state, &ep.steps);
            let choices = e.choices.as_ref().ok_or("missing choices")?;
            let satisfied: Vec<&String> = choices
                .iter()
                .filter(|c| library.iter().find(|a| &a.name == *c).is_some_and(|a| a.goal.iter().all(|p| end.holds(p))))
                .collect();
            match satisfied[..] {
                [only] => Ok(only.clone()),
                _ => Err(format!("{} choices satisfied at the end", satisfied.len())),
            }
        }
        _ => Err("task has no replay oracle".into()),
    }
}

/// Tasks covered by [`verify_suite`].
pub const ORACLE_TASKS: [EvalTask; 4] = [
    EvalTask::CountingQa,
    EvalTask::ObjectPathTrackingEval,
    EvalTask::ObjectLocationQa,
    EvalTask::ActivityRecognitionQa,
];

/// Replays the source of every counting, path, location and recognition
/// example and compares the recomputed answer with the stored gold.
pub fn verify_suite(suite: &EvalSuite, library: &[Activity]) -> OracleReport {
    let sources: BTreeMap<&str, &ExperienceRecord> = suite.sources.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut report = OracleReport::default();
    for e in suite.examples.iter().filter(|e| ORACLE_TASKS.contains(&e.task)) {
        *report.checked.entry(e.task).or_default() += 1;
        let found = match sources.get(e.meta.source.as_str()) {
            Some(src) => recompute(e, src, library).unwrap_or_else(|err| format!("<{err}>")),
            None => "<missing source>".to_string(),
        };
        if found != e.gold {
            report.mismatches.push(Mismatch { id: e.id.clone(), task: e.task, expected: e.gold.clone(), found });
        }
    }
    report
}
