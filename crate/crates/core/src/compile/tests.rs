use std::collections::BTreeSet;
use std::sync::Arc;

use super::*;
use crate::experience::ExperienceRecord;
use crate::explore::{explore, trace_from_steps, PolicyBias};
use crate::goals::builtin_activities;
use crate::planner::{plan, PlannerConfig};
use crate::world::{
    parse_action_text, sample_scene, split_plan_text, ActionStep, AgentId, Catalog, Relation, SceneSize, Support, Verb,
    WorldState,
};

fn catalog() -> Arc<Catalog> {
    Arc::new(Catalog::builtin())
}

fn episode(name: &str, seed: u64) -> ExperienceRecord {
    let c = catalog();
    let act = builtin_activities(&c).into_iter().find(|a| a.name == name).unwrap();
    let s = sample_scene(&c, seed, SceneSize::Medium);
    let ep = plan(&s, &act, &PlannerConfig { seed, ..Default::default() }).unwrap();
    assert!(ep.success);
    ExperienceRecord::plan(format!("plan-{name}-{seed}"), ep, seed)
}

fn put_on_floor(s: &mut WorldState, obj: crate::world::ObjectId, room: crate::world::ObjectId) {
    let o = &mut s.objects_mut()[obj.0 as usize];
    o.location = room;
    o.support = None;
}

/// Apple and plate carried onto an empty bookshelf.
fn bookshelf_trace() -> ExperienceRecord {
    let mut s = sample_scene(&catalog(), 6, SceneSize::Medium);
    let living = s.room_named("living room").unwrap();
    let shelf = s.instances_named("bookshelf")[0];
    let apple = s.instances_named("apple")[0];
    let plate = s.instances_named("plate")[0];
    for o in s.supported_by(shelf) {
        put_on_floor(&mut s, o, living);
    }
    put_on_floor(&mut s, apple, living);
    put_on_floor(&mut s, plate, living);
    s.agents_mut()[0].location = living;
    let tom = AgentId(0);
    let steps = vec![
        ActionStep::unary(tom, Verb::Grab, apple),
        ActionStep::binary(tom, Verb::Put, apple, shelf),
        ActionStep::unary(tom, Verb::Grab, plate),
        ActionStep::binary(tom, Verb::Put, plate, shelf),
    ];
    ExperienceRecord::explore("explore-shelf", trace_from_steps(&s, steps, 0).unwrap(), 0)
}

fn plate_trace() -> ExperienceRecord {
    let mut s = sample_scene(&catalog(), 4, SceneSize::Medium);
    let kitchen = s.room_named("kitchen").unwrap();
    let living = s.room_named("living room").unwrap();
    let dining = s.room_named("dining room").unwrap();
    let bedroom = s.room_named("bedroom").unwrap();
    let plate = s.instances_named("plate")[0];
    let table = s.instances_named("coffee table")[0];
    let counter = s.instances_named("kitchen counter")[0];
    s.agents_mut()[0].location = bedroom;
    s.add_agent(bedroom).unwrap();
    s.objects_mut()[plate.0 as usize].location = kitchen;
    s.objects_mut()[plate.0 as usize].support = Some(Support { relation: Relation::On, holder: counter });
    let (tom, mary) = (AgentId(0), AgentId(1));
    let steps = vec![
        ActionStep::unary(tom, Verb::Walk, kitchen),
        ActionStep::unary(mary, Verb::Walk, dining),
        ActionStep::unary(tom, Verb::Grab, plate),
        ActionStep::unary(tom, Verb::Walk, living),
        ActionStep::unary(mary, Verb::Walk, living),
        ActionStep::binary(tom, Verb::Put, plate, table),
        ActionStep::unary(mary, Verb::Grab, plate),
        ActionStep::unary(mary, Verb::Walk, bedroom),
    ];
    ExperienceRecord::explore("explore-plate", trace_from_steps(&s, steps, 0).unwrap(), 0)
}

#[test]
fn plan_generation_prompt_and_round_trip() {
    let rec = episode("watch TV", 3);
    let ex = compile_plan_generation(&rec, &MixtureConfig::default()).unwrap();
    assert!(ex.prompt.starts_with(
        "Q: How to watch TV? Given items include living room, sofa, TV. The sofa and TV are in the living room.\nA: "
    ));
    assert_eq!(ex.weight, 1.0);
    let ep = rec.as_plan().unwrap();
    let parsed: Vec<(Verb, Vec<String>)> =
        split_plan_text(&ex.completion).into_iter().map(|t| parse_action_text(t).unwrap()).collect();
    assert_eq!(parsed.len(), ep.steps.len());
    let mut state = ep.initial_state.clone();
    for ((verb, names), step) in parsed.iter().zip(&ep.steps) {
        assert_eq!(*verb, step.verb);
        let expected: Vec<&str> = step.args.iter().map(|a| state.name_of(*a)).collect();
        assert_eq!(names, &expected);
        state = crate::world::apply_action(&state, step).unwrap();
    }
}

#[test]
fn unsuccessful_episode_rejected() {
    let c = catalog();
    let act = builtin_activities(&c).into_iter().find(|a| a.name == "set up table").unwrap();
    let s = sample_scene(&c, 1, SceneSize::Medium);
    let ep = plan(&s, &act, &PlannerConfig { max_depth: 1, ..Default::default() }).unwrap();
    assert!(!ep.success);
    let rec = ExperienceRecord::plan("p", ep, 1);
    assert!(matches!(compile_plan_generation(&rec, &MixtureConfig::default()), Err(CompileError::Unsuccessful(_))));
}

#[test]
fn activity_recognition_choices() {
    let c = catalog();
    let lib = builtin_activities(&c);
    let pool: Vec<&Activity> = lib.iter().collect();
    let names: BTreeSet<&str> = lib.iter().map(|a| a.name.as_str()).collect();
    for seed in 0..10 {
        let rec = episode("watch TV", seed);
        let ex = compile_activity_recognition(&rec, &pool, &MixtureConfig::default()).unwrap();
        assert_eq!(ex.completion, "watch TV");
        assert_eq!(ex.weight, 0.7);
        let choices = ex.choices.unwrap();
        assert_eq!(choices.len(), 4);
        assert_eq!(choices.iter().collect::<BTreeSet<_>>().len(), 4);
        assert!(choices.iter().all(|c| names.contains(c.as_str())));
        assert_eq!(choices.iter().filter(|c| *c == "watch TV").count(), 1);
    }
    let tiny: Vec<&Activity> = pool[..2].to_vec();
    let rec = episode("watch TV", 0);
    assert!(matches!(
        compile_activity_recognition(&rec, &tiny, &MixtureConfig::default()),
        Err(CompileError::TooFewActivities { .. })
    ));
}

#[test]
fn counting_example() {
    let rec = bookshelf_trace();
    let ex = compile_counting(&rec, &MixtureConfig::default()).unwrap();
    assert!(ex.prompt.contains("How many items are there on the bookshelf?\nA: "), "{}", ex.prompt);
    assert_eq!(ex.completion, "Ther are 2 itmes on the bookshelf. They are apple, plate");
    let plain = MixtureConfig { verbatim_templates: false, ..Default::default() };
    assert_eq!(
        compile_counting(&rec, &plain).unwrap().completion,
        "There are 2 items on the bookshelf. They are apple, plate"
    );
}

#[test]
fn path_tracking_example() {
    let rec = plate_trace();
    let ex = compile_path_tracking(&rec, &MixtureConfig::default()).unwrap();
    assert_eq!(ex.completion, "kitchen, living room, bedroom");
    assert!(ex.prompt.contains("Tom grabbed a plate."));
    assert!(ex.prompt.ends_with("What is the order of the rooms where the plate appeared?\nAnswer: "));
    let qs = location_questions(
        rec.as_explore().unwrap().initial_state.instances_named("plate")[0],
        &rec.as_explore().unwrap().object_paths[&rec.as_explore().unwrap().initial_state.instances_named("plate")[0]],
    );
    let s = &rec.as_explore().unwrap().initial_state;
    let rendered: Vec<(String, String, String)> = qs
        .iter()
        .map(|q| (q.preposition.clone(), s.name_of(q.reference_room).into(), s.name_of(q.answer).into()))
        .collect();
    assert!(rendered.contains(&("before".into(), "living room".into(), "kitchen".into())));
    assert!(rendered.contains(&("after".into(), "living room".into(), "bedroom".into())));
}

#[test]
fn trace_without_receiver_or_motion() {
    let s = sample_scene(&catalog(), 2, SceneSize::Medium);
    let t = explore(&s, 1, 5, &PolicyBias::all_walk(), 0).unwrap();
    let rec = ExperienceRecord::explore("walks", t, 0);
    assert!(matches!(compile_counting(&rec, &MixtureConfig::default()), Err(CompileError::NoReceiver(_))));
    assert!(matches!(compile_path_tracking(&rec, &MixtureConfig::default()), Err(CompileError::NoMovedObject(_))));
}

#[test]
fn split_is_disjoint_and_deterministic() {
    let lib = builtin_activities(&catalog());
    let a = ActivitySplit::new(&lib, 0.2, 7);
    assert_eq!(a, ActivitySplit::new(&lib, 0.2, 7));
    a.validate().unwrap();
    assert_eq!(a.seen.len() + a.unseen.len(), lib.len());
    assert!(!a.unseen.is_empty() && !a.seen.is_empty());
    let bad = ActivitySplit { seen: vec!["x".into()], unseen: vec!["x".into()] };
    assert!(matches!(bad.validate(), Err(CompileError::SplitOverlap(_))));
}

#[test]
fn training_set_respects_split_and_weights() {
    let c = catalog();
    let lib = builtin_activities(&c);
    let split = ActivitySplit::new(&lib, 0.2, 1);
    let mut records = Vec::new();
    for (i, act) in lib.iter().enumerate().take(24) {
        let s = sample_scene(&c, i as u64, SceneSize::Medium);
        let ep = plan(&s, act, &PlannerConfig { seed: i as u64, ..Default::default() }).unwrap();
        records.push(ExperienceRecord::plan(format!("plan-{i:03}"), ep, i as u64));
    }
    for i in 0..20u64 {
        let s = sample_scene(&c, 100 + i, SceneSize::Medium);
        let t = explore(&s, 2, 30, &PolicyBias::default(), i).unwrap();
        records.push(ExperienceRecord::explore(format!("explore-{i:03}"), t, i));
    }
    let cfg = MixtureConfig::default();
    let out = compile_training(&records, &lib, &split, &cfg).unwrap();
    let tasks: BTreeSet<TrainTask> = out.iter().map(|e| e.task).collect();
    assert_eq!(tasks.len(), 4, "{tasks:?}");
    for e in &out {
        assert_eq!(e.weight, cfg.weight(e.task));
        for unseen in &split.unseen {
            assert!(!e.prompt.contains(&format!("How to {unseen}?")), "{}", e.id);
            assert_ne!(&e.completion, unseen);
            if let Some(ch) = &e.choices {
                assert!(!ch.contains(unseen));
            }
        }
    }
    let again = compile_training(&records, &lib, &split, &cfg).unwrap();
    assert_eq!(out, again);
    let keys: Vec<(TrainTask, &str)> = out.iter().map(|e| (e.task, e.meta.source.as_str())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(matches!(compile_training(&[], &lib, &split, &cfg), Err(CompileError::Empty)));
    // Shots are complete exemplars of the same task.
    let counting = out.iter().find(|e| e.task == TrainTask::Counting).unwrap();
    assert!(counting.prompt.starts_with(templates::COUNTING_INSTRUCTION));
}

#[test]
fn small_eval_suite() {
    let c = catalog();
    let lib = builtin_activities(&c);
    let split = ActivitySplit::new(&lib, 0.2, 3);
    let cfg = EvalConfig { counts: EvalCounts::uniform(6), shot_pool: 14, ..Default::default() };
    let suite = generate_eval_suite(&c, &lib, &split, &cfg, 42).unwrap();
    assert_eq!(suite.examples.len(), 66);
    for t in EvalTask::ALL {
        assert_eq!(suite.examples.iter().filter(|e| e.task == t).count(), 6);
    }
    for e in &suite.examples {
        assert_eq!(e.n_shots, e.task.n_shots());
        assert_eq!(e.prompt.matches("\n\n").count(), e.n_shots, "{}", e.id);
        if e.task.is_multiple_choice() {
            let ch = e.choices.as_ref().unwrap();
            assert_eq!(ch.len(), 4);
            assert_eq!(ch[e.gold_index.unwrap()], e.gold);
            assert_eq!(ch.iter().collect::<BTreeSet<_>>().len(), 4);
        }
        match e.task {
            EvalTask::PlanGenVanillaUnseen | EvalTask::PlanGenConfusingUnseen => {
                assert!(split.unseen.contains(&e.fields["activity"]));
                assert_eq!(e.meta.split, Some(Split::Unseen));
            }
            EvalTask::PlanGenVanillaSeen | EvalTask::PlanGenConfusingSeen => {
                assert!(split.seen.contains(&e.fields["activity"]));
            }
            EvalTask::ObjectLocationQa => {
                let p = &e.fields["preposition"];
                assert!(p == "before" || p == "after");
            }
            _ => {}
        }
        if matches!(e.task, EvalTask::PlanGenConfusingSeen | EvalTask::PlanGenConfusingUnseen) {
            let plain = crate::planner::render_initial_condition(
                &suite.sources.iter().find(|s| s.id == e.meta.source).unwrap().as_plan().unwrap().initial_state,
                lib.iter().find(|a| a.name == e.fields["activity"]).unwrap(),
                false,
                0,
            );
            assert!(e.fields["condition"].len() > plain.len());
        }
    }
    let again = generate_eval_suite(&c, &lib, &split, &cfg, 42).unwrap();
    assert_eq!(suite.examples, again.examples);
}

#[test]
fn emit_round_trip_and_manifest() {
    let rec = plate_trace();
    let ex = vec![
        compile_path_tracking(&rec, &MixtureConfig::default()).unwrap(),
        compile_counting(&bookshelf_trace(), &MixtureConfig::default()).unwrap(),
    ];
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("train.jsonl");
    let m = emit_dataset(&ex, &p, 5, "abc").unwrap();
    assert_eq!(m.records, 2);
    assert_eq!(m.counts["counting"], 1);
    assert_eq!(m.counts["object_path_tracking"], 1);
    let back: Vec<DatasetExample> = read_dataset(&p).unwrap();
    assert_eq!(back, ex);
    let p2 = dir.path().join("again.jsonl");
    let m2 = emit_dataset(&back, &p2, 5, "abc").unwrap();
    assert_eq!(m.sha256, m2.sha256);
}
