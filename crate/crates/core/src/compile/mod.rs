//! Compiles experiences into finetuning examples and generates evaluation
//! sets.

mod emit;
mod eval;
mod facts;
pub mod templates;
mod train;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::goals::{Activity, GoalError};
use crate::planner::PlanError;
use crate::world::WorldError;

pub use emit::{emit_dataset, read_dataset, sha256_hex, DatasetManifest, Tasked};
pub use eval::{generate_eval_suite, EvalConfig, EvalCounts, EvalSuite};
pub use facts::{
    counting_receivers, inference_state_text, location_questions, path_candidates, room_path_names, LocationQuestion,
    Receiver,
};
pub use train::{
    compile_activity_recognition, compile_counting, compile_path_tracking, compile_plan_generation, compile_training,
};

#[derive(Debug, Error)]
pub enum CompileError {
    #[error("episode `{0}` did not reach its goal")]
    Unsuccessful(String),
    #[error("not enough activities for distractors: need {needed}, have {have}")]
    TooFewActivities { needed: usize, have: usize },
    #[error("trace `{0}` has no receiving surface or container")]
    NoReceiver(String),
    #[error("trace `{0}` has no object that changed rooms")]
    NoMovedObject(String),
    #[error("seen and unseen activity sets overlap on `{0}`")]
    SplitOverlap(String),
    #[error("{family}: no usable sample after {attempts} attempts")]
    Exhausted { family: String, attempts: usize },
    #[error("empty experience stream")]
    Empty,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Goal(#[from] GoalError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainTask {
    PlanGeneration,
    ActivityRecognition,
    Counting,
    ObjectPathTracking,
}

impl TrainTask {
    pub const ALL: [TrainTask; 4] =
        [TrainTask::PlanGeneration, TrainTask::ActivityRecognition, TrainTask::Counting, TrainTask::ObjectPathTracking];

    pub fn name(self) -> &'static str {
        match self {
            TrainTask::PlanGeneration => "plan_generation",
            TrainTask::ActivityRecognition => "activity_recognition",
            TrainTask::Counting => "counting",
            TrainTask::ObjectPathTracking => "object_path_tracking",
        }
    }
}

impl fmt::Display for TrainTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalTask {
    PlanGenVanillaSeen,
    PlanGenVanillaUnseen,
    PlanGenConfusingSeen,
    PlanGenConfusingUnseen,
    HouseworkQa,
    NegationHouseworkQa,
    ActivityRecognitionQa,
    ActivityInferenceQa,
    CountingQa,
    ObjectPathTrackingEval,
    ObjectLocationQa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    RougeL,
    Accuracy,
    Lcs,
}

impl EvalTask {
    pub const ALL: [EvalTask; 11] = [
        EvalTask::PlanGenVanillaSeen,
        EvalTask::PlanGenVanillaUnseen,
        EvalTask::PlanGenConfusingSeen,
        EvalTask::PlanGenConfusingUnseen,
        EvalTask::HouseworkQa,
        EvalTask::NegationHouseworkQa,
        EvalTask::ActivityRecognitionQa,
        EvalTask::ActivityInferenceQa,
        EvalTask::CountingQa,
        EvalTask::ObjectPathTrackingEval,
        EvalTask::ObjectLocationQa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EvalTask::PlanGenVanillaSeen => "plan_gen_vanilla_seen",
            EvalTask::PlanGenVanillaUnseen => "plan_gen_vanilla_unseen",
            EvalTask::PlanGenConfusingSeen => "plan_gen_confusing_seen",
            EvalTask::PlanGenConfusingUnseen => "plan_gen_confusing_unseen",
            EvalTask::HouseworkQa => "housework_qa",
            EvalTask::NegationHouseworkQa => "negation_housework_qa",
            EvalTask::ActivityRecognitionQa => "activity_recognition_qa",
            EvalTask::ActivityInferenceQa => "activity_inference_qa",
            EvalTask::CountingQa => "counting_qa",
            EvalTask::ObjectPathTrackingEval => "object_path_tracking_eval",
            EvalTask::ObjectLocationQa => "object_location_qa",
        }
    }

    pub fn n_shots(self) -> usize {
        match self {
            EvalTask::HouseworkQa | EvalTask::NegationHouseworkQa | EvalTask::ActivityInferenceQa => 10,
            EvalTask::CountingQa => 5,
            EvalTask::ObjectLocationQa => 2,
            _ => 0,
        }
    }

    pub fn scoring(self) -> Scoring {
        match self {
            EvalTask::PlanGenVanillaSeen
            | EvalTask::PlanGenVanillaUnseen
            | EvalTask::PlanGenConfusingSeen
            | EvalTask::PlanGenConfusingUnseen => Scoring::RougeL,
            EvalTask::ObjectPathTrackingEval => Scoring::Lcs,
            _ => Scoring::Accuracy,
        }
    }

    pub fn is_multiple_choice(self) -> bool {
        matches!(
            self,
            EvalTask::HouseworkQa
                | EvalTask::NegationHouseworkQa
                | EvalTask::ActivityRecognitionQa
                | EvalTask::ActivityInferenceQa
        )
    }
}

impl fmt::Display for EvalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EvalTask {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalTask::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown eval task `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Seen,
    Unseen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureConfig {
    pub alpha_plan_generation: f64,
    pub alpha_activity_recognition: f64,
    pub alpha_counting: f64,
    pub alpha_path_tracking: f64,
    /// In-context exemplars prepended to each training prompt.
    pub exemplars_per_prompt: usize,
    /// Keep the counting answer's original spellings.
    pub verbatim_templates: bool,
    pub seed: u64,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            alpha_plan_generation: 1.0,
            alpha_activity_recognition: 0.7,
            alpha_counting: 1.0,
            alpha_path_tracking: 1.0,
            exemplars_per_prompt: 2,
            verbatim_templates: true,
            seed: 0,
        }
    }
}

impl MixtureConfig {
    pub fn weight(&self, task: TrainTask) -> f64 {
        match task {
            TrainTask::PlanGeneration => self.alpha_plan_generation,
            TrainTask::ActivityRecognition => self.alpha_activity_recognition,
            TrainTask::Counting => self.alpha_counting,
            TrainTask::ObjectPathTracking => self.alpha_path_tracking,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        for t in TrainTask::ALL {
            let w = self.weight(t);
            if !(w > 0.0 && w.is_finite()) {
                return Err(format!("weight for {t} must be positive, got {w}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleMeta {
    pub seed: u64,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetExample {
    pub id: String,
    pub task: TrainTask,
    pub weight: f64,
    pub prompt: String,
    pub completion: String,
    /// Answer options shown for recognition examples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    pub meta: ExampleMeta,
}

/// How a multiple-choice item may be scored by a language model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceScoring {
    pub prompt_formats: Vec<String>,
    pub normalizations: Vec<String>,
}

impl Default for ChoiceScoring {
    fn default() -> Self {
        ChoiceScoring {
            prompt_formats: vec!["multiple_choice".into(), "cloze".into()],
            normalizations: vec!["length".into(), "unconditioned".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMeta {
    pub seed: u64,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice_scoring: Option<ChoiceScoring>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalExample {
    pub id: String,
    pub task: EvalTask,
    pub prompt: String,
    pub gold: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_index: Option<usize>,
    pub n_shots: usize,
    pub scoring: Scoring,
    /// Template slot values of the query.
    pub fields: BTreeMap<String, String>,
    pub meta: EvalMeta,
}

/// Disjoint seen/unseen partition of an activity library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivitySplit {
    pub seen: Vec<String>,
    pub unseen: Vec<String>,
}

impl ActivitySplit {
    /// Holds out roughly `unseen_fraction` of the library, chosen by a
    /// seeded hash of each name. At least one activity lands on each side.
    pub fn new(library: &[Activity], unseen_fraction: f64, seed: u64) -> Self {
        let mut keyed: Vec<(u64, &str)> =
            library.iter().map(|a| (crate::derive_seed(seed, &a.name), a.name.as_str())).collect();
        keyed.sort();
        let n = library.len();
        let k = ((n as f64 * unseen_fraction).round() as usize).clamp(1.min(n), n.saturating_sub(1));
        let unseen: BTreeSet<&str> = keyed.iter().take(k).map(|(_, n)| *n).collect();
        let (mut seen, mut held) = (Vec::new(), Vec::new());
        for a in library {
            if unseen.contains(a.name.as_str()) {
                held.push(a.name.clone());
            } else {
                seen.push(a.name.clone());
            }
        }
        ActivitySplit { seen, unseen: held }
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        let seen: BTreeSet<&String> = self.seen.iter().collect();
        match self.unseen.iter().find(|u| seen.contains(u)) {
            Some(dup) => Err(CompileError::SplitOverlap(dup.clone())),
            None => Ok(()),
        }
    }

    pub fn split_of(&self, name: &str) -> Option<Split> {
        if self.seen.iter().any(|s| s == name) {
            Some(Split::Seen)
        } else if self.unseen.iter().any(|s| s == name) {
            Some(Split::Unseen)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests;
