//! Pipeline configuration: one TOML file, overridable from flags and the
//! environment.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use ewc_lora::DemoConfig;
use homeworld::compile::{sha256_hex, ActivitySplit, EvalConfig, EvalCounts, MixtureConfig};
use homeworld::explore::ExploreConfig;
use homeworld::goals::{builtin_activities, load_activity_library, Activity};
use homeworld::planner::PlannerConfig;
use homeworld::world::{Catalog, SceneSize};
use serde::{Deserialize, Serialize};

use crate::{CliError, ExitKind};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Object catalog TOML; the built-in catalog when unset.
    pub catalog: Option<PathBuf>,
    /// Activity library TOML; the built-in library when unset.
    pub activities: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectConfig {
    /// Planner episodes per library activity, each in a fresh scene.
    pub episodes_per_activity: usize,
    /// Exploration traces.
    pub traces: usize,
    pub scene_size: SceneSize,
    /// `validate` fails when the recorded success rate is below this.
    pub min_success_rate: f64,
}

impl Default for CollectConfig {
    fn default() -> Self {
        CollectConfig { episodes_per_activity: 6, traces: 300, scene_size: SceneSize::Medium, min_success_rate: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub counts: EvalCounts,
    pub scene_size: SceneSize,
    pub max_attempts: usize,
    pub shot_pool: usize,
    /// Share of the library held out as unseen activities.
    pub unseen_fraction: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        let d = EvalConfig::default();
        EvalSettings {
            counts: d.counts,
            scene_size: d.scene_size,
            max_attempts: d.max_attempts,
            shot_pool: d.shot_pool,
            unseen_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EwcSettings {
    pub seeds: Vec<u64>,
    /// Penalty strengths; each is applied to both EWC regimes.
    pub lambdas: Vec<f64>,
    pub demo: DemoConfig,
}

impl Default for EwcSettings {
    fn default() -> Self {
        EwcSettings { seeds: vec![0], lambdas: vec![0.0, 0.5, 2.0], demo: DemoConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    pub out: PathBuf,
    pub paths: Paths,
    pub planner: PlannerConfig,
    pub collect: CollectConfig,
    pub explore: ExploreConfig,
    pub mixture: MixtureConfig,
    pub eval: EvalSettings,
    pub ewc: EwcSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            jobs: 0,
            out: PathBuf::from("out"),
            paths: Paths::default(),
            planner: PlannerConfig::default(),
            collect: CollectConfig::default(),
            explore: ExploreConfig::default(),
            mixture: MixtureConfig::default(),
            eval: EvalSettings::default(),
            ewc: EwcSettings::default(),
        }
    }
}

/// Values given on the command line or through `HOMEWORLD_*` variables.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    /// `dotted.key=value` assignments; values are parsed as TOML, falling
    /// back to a plain string.
    pub set: Vec<String>,
}

fn set_dotted(table: &mut toml::Table, assignment: &str) -> anyhow::Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| anyhow!("`{assignment}` is not KEY=VALUE"))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow!("`{p}` in `{key}` is not a table"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl PipelineConfig {
    /// Reads `path` (if any), applies overrides, and validates the result.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let usage = |e: anyhow::Error| CliError::new(ExitKind::Usage, "config", e);
        let invalid = |e: anyhow::Error| CliError::new(ExitKind::Validation, "config", e);
        let mut table = match path {
            Some(p) => {
                let text =
                    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())).map_err(usage)?;
                toml::from_str::<toml::Table>(&text)
                    .with_context(|| format!("parsing {}", p.display()))
                    .map_err(invalid)?
            }
            None => toml::Table::new(),
        };
        for s in &overrides.set {
            set_dotted(&mut table, s).map_err(usage)?;
        }
        if let Some(seed) = overrides.seed {
            table.insert(
                "seed".into(),
                toml::Value::Integer(i64::try_from(seed).map_err(|_| usage(anyhow!("seed too large")))?),
            );
        }
        if let Some(jobs) = overrides.jobs {
            table.insert("jobs".into(), toml::Value::Integer(jobs as i64));
        }
        if let Some(out) = &overrides.out {
            table.insert("out".into(), toml::Value::String(out.display().to_string()));
        }
        let cfg: PipelineConfig = table.try_into().map_err(|e: toml::de::Error| invalid(e.into()))?;
        cfg.validate().map_err(invalid)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.planner.validate()?;
        self.mixture.validate().map_err(|e| anyhow!("mixture: {e}"))?;
        self.ewc.demo.validate()?;
        if let Some(l) = self.ewc.lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            bail!("ewc.lambdas: {l} is not a non-negative number");
        }
        let f = self.eval.unseen_fraction;
        if !(f > 0.0 && f < 1.0) {
            bail!("eval.unseen_fraction must be in (0, 1), got {f}");
        }
        let e = &self.explore;
        if e.min_agents == 0 || e.min_agents > e.max_agents || e.min_steps == 0 || e.min_steps > e.max_steps {
            bail!("explore: need 1 <= min <= max for agents and steps");
        }
        if self.collect.episodes_per_activity == 0 {
            bail!("collect.episodes_per_activity must be at least 1");
        }
        for p in [&self.paths.catalog, &self.paths.activities].into_iter().flatten() {
            if !p.is_file() {
                bail!("{} does not exist", p.display());
            }
        }
        Ok(())
    }

    /// Hash of every setting that affects artifacts; thread count and output
    /// location are left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("struct serializes to an object");
        obj.remove("jobs");
        obj.remove("out");
        sha256_hex(v.to_string().as_bytes())
    }

    pub fn catalog(&self) -> anyhow::Result<Arc<Catalog>> {
        Ok(Arc::new(match &self.paths.catalog {
            Some(p) => Catalog::load(p)?,
            None => Catalog::builtin(),
        }))
    }

    pub fn library(&self, catalog: &Catalog) -> anyhow::Result<Vec<Activity>> {
        Ok(match &self.paths.activities {
            Some(p) => load_activity_library(p, catalog)?,
            None => builtin_activities(catalog),
        })
    }

    pub fn split(&self, library: &[Activity]) -> ActivitySplit {
        ActivitySplit::new(library, self.eval.unseen_fraction, self.stage_seed("split"))
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            counts: self.eval.counts.clone(),
            planner: self.planner.clone(),
            explore: self.explore.clone(),
            scene_size: self.eval.scene_size,
            max_attempts: self.eval.max_attempts,
            shot_pool: self.eval.shot_pool,
        }
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        homeworld::derive_seed(self.seed, stage)
    }
}
