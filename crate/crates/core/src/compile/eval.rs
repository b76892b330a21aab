//! Evaluation suite generation.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::facts::{
    counting_receivers, has_irrelevant_action, inference_state_text, item_classes, location_questions, path_candidates,
    room_path_names,
};
use super::templates;
use super::train::{pick_distractors, shuffle_choices};
use super::{ActivitySplit, ChoiceScoring, CompileError, EvalExample, EvalMeta, EvalTask, Split};
use crate::derive_seed;
use crate::experience::ExperienceRecord;
use crate::explore::{explore, render_trace_to_narrative, ExplorationTrace, ExploreConfig};
use crate::goals::Activity;
use crate::planner::{plan, render_initial_condition, PlanEpisode, PlannerConfig};
use crate::world::{sample_scene, Catalog, SceneSize};

/// Examples per evaluation family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalCounts {
    pub plan_gen_vanilla_seen: usize,
    pub plan_gen_vanilla_unseen: usize,
    pub plan_gen_confusing_seen: usize,
    pub plan_gen_confusing_unseen: usize,
    pub housework_qa: usize,
    pub negation_housework_qa: usize,
    pub activity_recognition_qa: usize,
    pub activity_inference_qa: usize,
    pub counting_qa: usize,
    pub object_path_tracking_eval: usize,
    pub object_location_qa: usize,
}

impl Default for EvalCounts {
    fn default() -> Self {
        EvalCounts {
            plan_gen_vanilla_seen: 175,
            plan_gen_vanilla_unseen: 54,
            plan_gen_confusing_seen: 135,
            plan_gen_confusing_unseen: 43,
            housework_qa: 261,
            negation_housework_qa: 162,
            activity_recognition_qa: 549,
            activity_inference_qa: 262,
            counting_qa: 194,
            object_path_tracking_eval: 200,
            object_location_qa: 200,
        }
    }
}

impl EvalCounts {
    /// Every family set to `n`.
    pub fn uniform(n: usize) -> Self {
        let mut c = EvalCounts::default();
        for t in EvalTask::ALL {
            *c.get_mut(t) = n;
        }
        c
    }

    pub fn get(&self, task: EvalTask) -> usize {
        let mut c = self.clone();
        *c.get_mut(task)
    }

    fn get_mut(&mut self, task: EvalTask) -> &mut usize {
        match task {
            EvalTask::PlanGenVanillaSeen => &mut self.plan_gen_vanilla_seen,
            EvalTask::PlanGenVanillaUnseen => &mut self.plan_gen_vanilla_unseen,
            EvalTask::PlanGenConfusingSeen => &mut self.plan_gen_confusing_seen,
            EvalTask::PlanGenConfusingUnseen => &mut self.plan_gen_confusing_unseen,
            EvalTask::HouseworkQa => &mut self.housework_qa,
            EvalTask::NegationHouseworkQa => &mut self.negation_housework_qa,
            EvalTask::ActivityRecognitionQa => &mut self.activity_recognition_qa,
            EvalTask::ActivityInferenceQa => &mut self.activity_inference_qa,
            EvalTask::CountingQa => &mut self.counting_qa,
            EvalTask::ObjectPathTrackingEval => &mut self.object_path_tracking_eval,
            EvalTask::ObjectLocationQa => &mut self.object_location_qa,
        }
    }

    pub fn total(&self) -> usize {
        EvalTask::ALL.iter().map(|t| self.get(*t)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub counts: EvalCounts,
    pub planner: PlannerConfig,
    pub explore: ExploreConfig,
    pub scene_size: SceneSize,
    /// Retries per example before giving up.
    pub max_attempts: usize,
    /// Candidate in-context exemplars generated per few-shot family.
    pub shot_pool: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            counts: EvalCounts::default(),
            planner: PlannerConfig::default(),
            explore: ExploreConfig::default(),
            scene_size: SceneSize::Medium,
            max_attempts: 50,
            shot_pool: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalSuite {
    pub examples: Vec<EvalExample>,
    /// Experiences behind trace- and plan-based examples, keyed by the
    /// examples' `meta.source`.
    pub sources: Vec<ExperienceRecord>,
}

struct Ctx<'a> {
    catalog: &'a Arc<Catalog>,
    library: &'a [Activity],
    split: &'a ActivitySplit,
    cfg: &'a EvalConfig,
    seed: u64,
    seen: Vec<&'a Activity>,
    unseen: Vec<&'a Activity>,
    negatable: Vec<&'a Activity>,
    items: Vec<String>,
}

struct Draft {
    activity: Option<String>,
    prompt: String,
    gold: String,
    choices: Option<(Vec<String>, usize)>,
    fields: BTreeMap<String, String>,
    source: Option<ExperienceRecord>,
    source_id: String,
    split: Option<Split>,
    seed: u64,
}

fn fields(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

impl<'a> Ctx<'a> {
    fn activity_pool(&self, task: EvalTask) -> &[&'a Activity] {
        match task {
            EvalTask::PlanGenVanillaSeen | EvalTask::PlanGenConfusingSeen => &self.seen,
            EvalTask::PlanGenVanillaUnseen | EvalTask::PlanGenConfusingUnseen => &self.unseen,
            EvalTask::NegationHouseworkQa => &self.negatable,
            _ => &[],
        }
    }

    fn activity_for(&self, task: EvalTask, index: usize) -> &'a Activity {
        let pool = self.activity_pool(task);
        if pool.is_empty() {
            &self.library[index % self.library.len()]
        } else {
            pool[index % pool.len()]
        }
    }

    fn episode(&self, activity: &Activity, seed: u64) -> Result<Option<PlanEpisode>, CompileError> {
        let scene = sample_scene(self.catalog, seed, self.cfg.scene_size);
        let cfg = PlannerConfig { seed, ..self.cfg.planner.clone() };
        let ep = plan(&scene, activity, &cfg)?;
        Ok(ep.success.then_some(ep))
    }

    fn trace(&self, seed: u64) -> Result<ExplorationTrace, CompileError> {
        let scene = sample_scene(self.catalog, seed, self.cfg.scene_size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (agents, steps) = self.cfg.explore.sample_shape(&mut rng);
        explore(&scene, agents, steps, &self.cfg.explore.bias, seed).map_err(|e| CompileError::Io(e.to_string()))
    }

    /// One attempt at an example; `None` asks for another seed.
    fn draft(&self, task: EvalTask, index: usize, seed: u64, id: &str) -> Result<Option<Draft>, CompileError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let act = self.activity_for(task, index);
        let act_split = self.split.split_of(&act.name);
        Ok(Some(match task {
            EvalTask::PlanGenVanillaSeen
            | EvalTask::PlanGenVanillaUnseen
            | EvalTask::PlanGenConfusingSeen
            | EvalTask::PlanGenConfusingUnseen => {
                let Some(ep) = self.episode(act, seed)? else { return Ok(None) };
                let confusing = matches!(task, EvalTask::PlanGenConfusingSeen | EvalTask::PlanGenConfusingUnseen);
                let condition = render_initial_condition(&ep.initial_state, act, confusing, seed);
                let gold = ep.plan_text();
                let (prompt, _) = templates::plan_generation(&act.name, &condition, &gold);
                Draft {
                    activity: Some(act.name.clone()),
                    prompt,
                    gold,
                    choices: None,
                    fields: fields(&[("activity", &act.name), ("condition", &condition)]),
                    source: Some(ExperienceRecord::plan(id, ep, seed)),
                    source_id: id.to_string(),
                    split: act_split,
                    seed,
                }
            }
            EvalTask::HouseworkQa | EvalTask::NegationHouseworkQa => {
                let irrelevant: Vec<&String> = self.items.iter().filter(|c| !act.is_relevant(c)).collect();
                let (gold, distractors): (String, Vec<String>) = if task == EvalTask::HouseworkQa {
                    let relevant: Vec<&str> = act.items(self.catalog).collect();
                    let Some(gold) = relevant.choose(&mut rng) else { return Ok(None) };
                    let d = irrelevant.choose_multiple(&mut rng, 3).map(|s| s.to_string()).collect();
                    (gold.to_string(), d)
                } else {
                    let Some(gold) = irrelevant.choose(&mut rng) else { return Ok(None) };
                    let d = act.relevant_classes.choose_multiple(&mut rng, 3).cloned().collect();
                    (gold.to_string(), d)
                };
                if distractors.len() < 3 {
                    return Ok(None);
                }
                let (prompt, _) = if task == EvalTask::HouseworkQa {
                    templates::housework_qa(&act.name, &gold)
                } else {
                    templates::negation_housework_qa(&act.name, &gold)
                };
                let choices = shuffle_choices(&gold, distractors, &mut rng);
                Draft {
                    activity: Some(act.name.clone()),
                    prompt,
                    gold,
                    choices: Some(choices),
                    fields: fields(&[("activity", &act.name)]),
                    source: None,
                    source_id: format!("activity:{}", act.name),
                    split: act_split,
                    seed,
                }
            }
            EvalTask::ActivityRecognitionQa | EvalTask::ActivityInferenceQa => {
                let Some(ep) = self.episode(act, seed)? else { return Ok(None) };
                let end = ep.final_state();
                let pool: Vec<&Activity> = self.library.iter().collect();
                let distractors = pick_distractors(act, &pool, &end, self.catalog, 3, &mut rng)?;
                let choices = shuffle_choices(&act.name, distractors, &mut rng);
                let (prompt, slot) = if task == EvalTask::ActivityRecognitionQa {
                    let plan = ep.plan_text();
                    (templates::activity_recognition(&plan, &act.name).0, ("plan", plan))
                } else {
                    let state = inference_state_text(&end, ep.agent, act);
                    if state.is_empty() {
                        return Ok(None);
                    }
                    (templates::activity_inference(&state, &act.name).0, ("state", state))
                };
                Draft {
                    activity: Some(act.name.clone()),
                    prompt,
                    gold: act.name.clone(),
                    choices: Some(choices),
                    fields: fields(&[(slot.0, &slot.1)]),
                    source: Some(ExperienceRecord::plan(id, ep, seed)),
                    source_id: id.to_string(),
                    split: act_split,
                    seed,
                }
            }
            EvalTask::CountingQa => {
                let trace = self.trace(seed)?;
                if !has_irrelevant_action(&trace) {
                    return Ok(None);
                }
                let receivers = counting_receivers(&trace);
                let Some(r) = receivers.choose(&mut rng) else { return Ok(None) };
                let s = &trace.initial_state;
                let movement = render_trace_to_narrative(&trace, rng.gen());
                let location = s.name_of(r.holder).to_string();
                let prep = r.relation.preposition();
                let (prompt, gold) = templates::counting_qa(&movement, prep, &location, r.items.len());
                Draft {
                    activity: None,
                    prompt,
                    gold,
                    choices: None,
                    fields: fields(&[("movement", &movement), ("location", &location), ("preposition", prep)]),
                    source: Some(ExperienceRecord::explore(id, trace, seed)),
                    source_id: id.to_string(),
                    split: None,
                    seed,
                }
            }
            EvalTask::ObjectPathTrackingEval | EvalTask::ObjectLocationQa => {
                let trace = self.trace(seed)?;
                let candidates = path_candidates(&trace);
                let s = &trace.initial_state;
                let movement = render_trace_to_narrative(&trace, rng.gen());
                let (prompt, gold, f) = if task == EvalTask::ObjectPathTrackingEval {
                    let Some((obj, path)) = candidates.choose(&mut rng) else { return Ok(None) };
                    let object = s.name_of(*obj);
                    let gold = room_path_names(s, path).join(", ");
                    let (prompt, _) = templates::object_path_tracking(&movement, object, &gold);
                    (prompt, gold, fields(&[("movement", &movement), ("object", object)]))
                } else {
                    let questions: Vec<_> = candidates.iter().flat_map(|(o, p)| location_questions(*o, p)).collect();
                    let Some(q) = questions.choose(&mut rng) else { return Ok(None) };
                    let object = s.name_of(q.object);
                    let reference = s.name_of(q.reference_room);
                    let gold = s.name_of(q.answer).to_string();
                    let (prompt, _) = templates::object_location(&movement, object, &q.preposition, reference, &gold);
                    (
                        prompt,
                        gold,
                        fields(&[
                            ("movement", &movement),
                            ("object", object),
                            ("preposition", &q.preposition),
                            ("reference_room", reference),
                        ]),
                    )
                };
                Draft {
                    activity: None,
                    prompt,
                    gold,
                    choices: None,
                    fields: f,
                    source: Some(ExperienceRecord::explore(id, trace, seed)),
                    source_id: id.to_string(),
                    split: None,
                    seed,
                }
            }
        }))
    }

    fn generate(&self, task: EvalTask, label: &str, index: usize) -> Result<Draft, CompileError> {
        let id = format!("{}/{label}{index:05}", task.name());
        for attempt in 0..self.cfg.max_attempts {
            let seed = derive_seed(self.seed, &format!("{id}/{attempt}"));
            if let Some(d) = self.draft(task, index, seed, &id)? {
                return Ok(d);
            }
        }
        Err(CompileError::Exhausted { family: task.name().to_string(), attempts: self.cfg.max_attempts })
    }
}

/// Generates every evaluation family with the configured counts. Output is
/// ordered by family, then index, independent of thread count.
pub fn generate_eval_suite(
    catalog: &Arc<Catalog>,
    library: &[Activity],
    split: &ActivitySplit,
    cfg: &EvalConfig,
    seed: u64,
) -> Result<EvalSuite, CompileError> {
    split.validate()?;
    if library.len() < 4 {
        return Err(CompileError::TooFewActivities { needed: 4, have: library.len() });
    }
    let pick = |s: Split| -> Vec<&Activity> { library.iter().filter(|a| split.split_of(&a.name) == Some(s)).collect() };
    let ctx = Ctx {
        catalog,
        library,
        split,
        cfg,
        seed,
        seen: pick(Split::Seen),
        unseen: pick(Split::Unseen),
        negatable: library.iter().filter(|a| a.relevant_classes.len() >= 3).collect(),
        items: item_classes(&sample_scene(catalog, 0, SceneSize::Small)),
    };
    for (task, pool) in [
        (EvalTask::PlanGenVanillaSeen, &ctx.seen),
        (EvalTask::PlanGenConfusingSeen, &ctx.seen),
        (EvalTask::PlanGenVanillaUnseen, &ctx.unseen),
        (EvalTask::PlanGenConfusingUnseen, &ctx.unseen),
        (EvalTask::NegationHouseworkQa, &ctx.negatable),
    ] {
        if cfg.counts.get(task) > 0 && pool.is_empty() {
            return Err(CompileError::TooFewActivities { needed: 1, have: 0 });
        }
    }

    let jobs: Vec<(EvalTask, &str, usize)> = EvalTask::ALL
        .iter()
        .flat_map(|&t| {
            let shots = if t.n_shots() > 0 && cfg.counts.get(t) > 0 { cfg.shot_pool.max(t.n_shots() + 1) } else { 0 };
            (0..cfg.counts.get(t)).map(move |i| (t, "", i)).chain((0..shots).map(move |i| (t, "shot", i)))
        })
        .collect();
    let drafts: Vec<Result<Draft, CompileError>> =
        jobs.par_iter().map(|&(t, label, i)| ctx.generate(t, label, i)).collect();

    let mut queries: Vec<(EvalTask, usize, Draft)> = Vec::new();
    let mut shots: BTreeMap<EvalTask, Vec<Draft>> = BTreeMap::new();
    for (&(t, label, i), d) in jobs.iter().zip(drafts) {
        let d = d?;
        if label.is_empty() {
            queries.push((t, i, d));
        } else {
            shots.entry(t).or_default().push(d);
        }
    }

    let mut examples = Vec::with_capacity(queries.len());
    let mut sources = Vec::new();
    for (task, index, d) in queries {
        let id = format!("{}/{index:05}", task.name());
        let mut prompt = d.prompt;
        if task.n_shots() > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &format!("{id}/shots")));
            let pool: Vec<String> = shots[&task]
                .iter()
                .filter(|s| s.activity.is_none() || s.activity != d.activity)
                .map(|s| format!("{}{}", s.prompt, s.gold))
                .collect();
            let chosen: Vec<String> = pool.choose_multiple(&mut rng, task.n_shots()).cloned().collect();
            if chosen.len() < task.n_shots() {
                return Err(CompileError::Exhausted { family: format!("{task} exemplars"), attempts: pool.len() });
            }
            prompt = templates::few_shot(None, &chosen, &prompt);
        }
        let (choices, gold_index) = match d.choices {
            Some((c, i)) => (Some(c), Some(i)),
            None => (None, None),
        };
        examples.push(EvalExample {
            id,
            task,
            prompt,
            gold: d.gold,
            choices,
            gold_index,
            n_shots: task.n_shots(),
            scoring: task.scoring(),
            fields: d.fields,
            meta: EvalMeta {
                seed: d.seed,
                source: d.source_id,
                split: d.split,
                choice_scoring: task.is_multiple_choice().then(ChoiceScoring::default),
            },
        });
        sources.extend(d.source);
    }
    Ok(EvalSuite { examples, sources })
}
