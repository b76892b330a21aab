//! Finetuning examples from collected experiences.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::facts::{counting_receivers, path_candidates, room_path_names};
use super::templates::{self, COUNTING_INSTRUCTION};
use super::{ActivitySplit, CompileError, DatasetExample, ExampleMeta, MixtureConfig, Split, TrainTask};
use crate::derive_seed;
use crate::experience::ExperienceRecord;
use crate::explore::render_trace_to_narrative;
use crate::goals::{satisfied_subset, Activity};
use crate::planner::PlanEpisode;
use crate::world::{Catalog, WorldState};

fn rng_for(cfg: &MixtureConfig, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, label))
}

fn example(
    task: TrainTask,
    rec: &ExperienceRecord,
    cfg: &MixtureConfig,
    (prompt, completion): (String, String),
    choices: Option<Vec<String>>,
    split: Option<Split>,
) -> DatasetExample {
    DatasetExample {
        id: format!("{}/{}", task.name(), rec.id),
        task,
        weight: cfg.weight(task),
        prompt,
        completion,
        choices,
        meta: ExampleMeta { seed: rec.seed, source: rec.id.clone(), split },
    }
}

fn successful(rec: &ExperienceRecord) -> Result<&PlanEpisode, CompileError> {
    match rec.as_plan() {
        Some(ep) if ep.success => Ok(ep),
        _ => Err(CompileError::Unsuccessful(rec.id.clone())),
    }
}

pub fn compile_plan_generation(rec: &ExperienceRecord, cfg: &MixtureConfig) -> Result<DatasetExample, CompileError> {
    let ep = successful(rec)?;
    let parts = templates::plan_generation(&ep.activity.name, &ep.initial_condition, &ep.plan_text());
    Ok(example(TrainTask::PlanGeneration, rec, cfg, parts, None, None))
}

/// Picks `n` distractor activity names for `gold`: activities sharing a room
/// with it first, then the rest. Activities whose goal already holds in
/// `final_state` are never offered.
pub(crate) fn pick_distractors(
    gold: &Activity,
    pool: &[&Activity],
    final_state: &WorldState,
    catalog: &Catalog,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<String>, CompileError> {
    let rooms: Vec<&str> = gold.rooms(catalog).collect();
    let (mut near, mut far): (Vec<&Activity>, Vec<&Activity>) = pool
        .iter()
        .copied()
        .filter(|a| a.name != gold.name)
        .filter(|a| match satisfied_subset(final_state, &a.goal) {
            Ok(sat) => sat.len() < a.goal.len(),
            Err(_) => true,
        })
        .partition(|a| a.rooms(catalog).any(|r| rooms.contains(&r)));
    near.shuffle(rng);
    far.shuffle(rng);
    let picked: Vec<String> = near.into_iter().chain(far).take(n).map(|a| a.name.clone()).collect();
    if picked.len() < n {
        return Err(CompileError::TooFewActivities { needed: n + 1, have: picked.len() + 1 });
    }
    Ok(picked)
}

/// Gold plus distractors in random order, and the gold's index.
pub(crate) fn shuffle_choices(gold: &str, distractors: Vec<String>, rng: &mut impl Rng) -> (Vec<String>, usize) {
    let mut choices = distractors;
    choices.push(gold.to_string());
    choices.shuffle(rng);
    let idx = choices.iter().position(|c| c == gold).expect("gold is among the choices");
    (choices, idx)
}

/// `pool` supplies distractor activities.
pub fn compile_activity_recognition(
    rec: &ExperienceRecord,
    pool: &[&Activity],
    cfg: &MixtureConfig,
) -> Result<DatasetExample, CompileError> {
    let ep = successful(rec)?;
    let mut rng = rng_for(cfg, &format!("activity_recognition/{}", rec.id));
    let final_state = ep.final_state();
    let distractors = pick_distractors(&ep.activity, pool, &final_state, final_state.catalog(), 3, &mut rng)?;
    let (choices, _) = shuffle_choices(&ep.activity.name, distractors, &mut rng);
    let parts = templates::activity_recognition(&ep.plan_text(), &ep.activity.name);
    Ok(example(TrainTask::ActivityRecognition, rec, cfg, parts, Some(choices), None))
}

pub fn compile_counting(rec: &ExperienceRecord, cfg: &MixtureConfig) -> Result<DatasetExample, CompileError> {
    let trace = rec.as_explore().ok_or_else(|| CompileError::NoReceiver(rec.id.clone()))?;
    let receivers = counting_receivers(trace);
    let mut rng = rng_for(cfg, &format!("counting/{}", rec.id));
    let r = receivers.choose(&mut rng).ok_or_else(|| CompileError::NoReceiver(rec.id.clone()))?;
    let s = &trace.initial_state;
    let items: Vec<&str> = r.items.iter().map(|o| s.name_of(*o)).collect();
    let movement = render_trace_to_narrative(trace, rng.gen());
    let parts = templates::counting(
        &movement,
        r.relation.preposition(),
        s.name_of(r.holder),
        items.len(),
        &items.join(", "),
        cfg.verbatim_templates,
    );
    Ok(example(TrainTask::Counting, rec, cfg, parts, None, None))
}

pub fn compile_path_tracking(rec: &ExperienceRecord, cfg: &MixtureConfig) -> Result<DatasetExample, CompileError> {
    let trace = rec.as_explore().ok_or_else(|| CompileError::NoMovedObject(rec.id.clone()))?;
    let candidates = path_candidates(trace);
    let mut rng = rng_for(cfg, &format!("object_path_tracking/{}", rec.id));
    let (obj, path) = candidates.choose(&mut rng).ok_or_else(|| CompileError::NoMovedObject(rec.id.clone()))?;
    let s = &trace.initial_state;
    let movement = render_trace_to_narrative(trace, rng.gen());
    let parts = templates::object_path_tracking(&movement, s.name_of(*obj), &room_path_names(s, path).join(", "));
    Ok(example(TrainTask::ObjectPathTracking, rec, cfg, parts, None, None))
}

/// Compiles every usable record. Plan episodes of unseen or failed
/// activities and traces without a usable question are skipped. Output is
/// ordered by task, then source id.
pub fn compile_training(
    records: &[ExperienceRecord],
    library: &[Activity],
    split: &ActivitySplit,
    cfg: &MixtureConfig,
) -> Result<Vec<DatasetExample>, CompileError> {
    if records.is_empty() {
        return Err(CompileError::Empty);
    }
    split.validate()?;
    cfg.validate().map_err(CompileError::Io)?;
    let pool: Vec<&Activity> = library.iter().filter(|a| split.split_of(&a.name) == Some(Split::Seen)).collect();
    let per_record: Vec<Result<Vec<DatasetExample>, CompileError>> = records
        .par_iter()
        .map(|rec| {
            let mut out = Vec::new();
            if let Some(ep) = rec.as_plan() {
                if !ep.success || split.split_of(&ep.activity.name) != Some(Split::Seen) {
                    return Ok(out);
                }
                let mut pg = compile_plan_generation(rec, cfg)?;
                pg.meta.split = Some(Split::Seen);
                out.push(pg);
                let mut ar = compile_activity_recognition(rec, &pool, cfg)?;
                ar.meta.split = Some(Split::Seen);
                out.push(ar);
            } else {
                if let Ok(c) = compile_counting(rec, cfg) {
                    out.push(c);
                }
                if let Ok(p) = compile_path_tracking(rec, cfg) {
                    out.push(p);
                }
            }
            Ok(out)
        })
        .collect();
    let mut examples = Vec::new();
    for r in per_record {
        examples.extend(r?);
    }
    examples.sort_by(|a, b| (a.task, &a.meta.source).cmp(&(b.task, &b.meta.source)));
    attach_shots(&mut examples, cfg);
    Ok(examples)
}

/// Prepends `exemplars_per_prompt` complete exemplars of the same task, drawn
/// from other sources.
fn attach_shots(examples: &mut [DatasetExample], cfg: &MixtureConfig) {
    let mut by_task: BTreeMap<TrainTask, Vec<usize>> = BTreeMap::new();
    for (i, e) in examples.iter().enumerate() {
        by_task.entry(e.task).or_default().push(i);
    }
    let full: Vec<String> = examples.iter().map(|e| format!("{}{}", e.prompt, e.completion)).collect();
    for (task, idxs) in by_task {
        let instruction = (task == TrainTask::Counting).then_some(COUNTING_INSTRUCTION);
        for &i in &idxs {
            let mut rng = rng_for(cfg, &format!("shots/{}", examples[i].id));
            let others: Vec<usize> =
                idxs.iter().copied().filter(|&j| examples[j].meta.source != examples[i].meta.source).collect();
            let shots: Vec<String> =
                others.choose_multiple(&mut rng, cfg.exemplars_per_prompt).map(|&j| full[j].clone()).collect();
            examples[i].prompt = templates::few_shot(instruction, &shots, &examples[i].prompt);
        }
    }
}
