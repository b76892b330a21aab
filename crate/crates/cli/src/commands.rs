use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use ewc_lora::{toy_continual_demo, DemoConfig, DemoReport};
use homeworld::compile::{compile_training, emit_dataset, generate_eval_suite, read_dataset, EvalExample, EvalSuite};
use homeworld::experience::{read_jsonl, write_jsonl, ExperienceRecord};
use homeworld::explore::explore;
use homeworld::metrics::{score_file, MetricError, ScoreReport};
use homeworld::oracle::{verify_suite, OracleReport};
use homeworld::planner::{plan, PlannerConfig, SearchStats};
use homeworld::world::{sample_scene, validate_state, SceneSize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::manifest::{write_json, Manifest};
use crate::{with_jobs, CliError, ExitKind};

pub const EXPERIENCES: &str = "experiences.jsonl";
pub const COLLECT_SUMMARY: &str = "collect_summary.json";
pub const TRAIN: &str = "train.jsonl";
pub const EVAL: &str = "eval.jsonl";
pub const EVAL_SOURCES: &str = "eval_sources.jsonl";
pub const SPLIT: &str = "split.json";
pub const ORACLE_REPORT: &str = "oracle_report.json";
pub const SCORES: &str = "scores.json";
pub const EWC_DEMO: &str = "ewc_demo.json";

fn usage(stage: &'static str) -> impl Fn(anyhow::Error) -> CliError {
    move |e| CliError::new(ExitKind::Usage, stage, e)
}

fn invalid(stage: &'static str) -> impl Fn(anyhow::Error) -> CliError {
    move |e| CliError::new(ExitKind::Validation, stage, e)
}

fn open_out(cfg: &PipelineConfig, stage: &'static str) -> Result<Manifest, CliError> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display())).map_err(usage(stage))?;
    let mut m = Manifest::open(&cfg.out, &cfg.hash(), cfg.seed).map_err(usage(stage))?;
    m.stage_seeds.insert(stage.to_string(), cfg.stage_seed(stage));
    Ok(m)
}

fn slug(name: &str) -> String {
    name.replace(' ', "_")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedEpisode {
    pub id: String,
    pub activity: String,
    pub steps: usize,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectSummary {
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Mean steps over successful episodes.
    pub mean_plan_length: f64,
    pub traces: usize,
    pub mean_trace_length: f64,
    pub failures: Vec<FailedEpisode>,
}

fn plan_episodes(cfg: &PipelineConfig, seed: u64) -> anyhow::Result<Vec<ExperienceRecord>> {
    let catalog = cfg.catalog()?;
    let library = cfg.library(&catalog)?;
    let jobs: Vec<(usize, usize)> =
        (0..library.len()).flat_map(|a| (0..cfg.collect.episodes_per_activity).map(move |e| (a, e))).collect();
    jobs.par_iter()
        .map(|&(a, e)| {
            let act = &library[a];
            let id = format!("plan/{}/{e}", slug(&act.name));
            let s = homeworld::derive_seed(seed, &id);
            let scene = sample_scene(&catalog, s, cfg.collect.scene_size);
            let pcfg = PlannerConfig { seed: s, ..cfg.planner.clone() };
            let ep = plan(&scene, act, &pcfg).with_context(|| id.clone())?;
            Ok(ExperienceRecord::plan(id, ep, s))
        })
        .collect()
}

fn exploration_traces(cfg: &PipelineConfig, seed: u64) -> anyhow::Result<Vec<ExperienceRecord>> {
    let catalog = cfg.catalog()?;
    (0..cfg.collect.traces)
        .into_par_iter()
        .map(|i| {
            let id = format!("explore/{i:05}");
            let s = homeworld::derive_seed(seed, &id);
            let scene = sample_scene(&catalog, s, cfg.collect.scene_size);
            let (agents, steps) = cfg.explore.sample_shape(&mut ChaCha8Rng::seed_from_u64(s));
            let trace = explore(&scene, agents, steps, &cfg.explore.bias, s).with_context(|| id.clone())?;
            Ok(ExperienceRecord::explore(id, trace, s))
        })
        .collect()
}

/// Runs the planner over the activity library and random exploration over
/// fresh scenes, writing the experience stream and a summary.
pub fn collect(cfg: &PipelineConfig) -> Result<CollectSummary, CliError> {
    const STAGE: &str = "collect";
    let mut manifest = open_out(cfg, STAGE)?;
    let seed = cfg.stage_seed(STAGE);
    let (plans, traces) =
        with_jobs(cfg.jobs, || Ok::<_, anyhow::Error>((plan_episodes(cfg, seed)?, exploration_traces(cfg, seed)?)))
            .and_then(|r| r)
            .map_err(invalid(STAGE))?;

    let eps: Vec<_> = plans.iter().filter_map(|r| r.as_plan().map(|p| (r, p))).collect();
    let solved: Vec<usize> = eps.iter().filter(|(_, p)| p.success).map(|(_, p)| p.steps.len()).collect();
    let failures: Vec<FailedEpisode> = eps
        .iter()
        .filter(|(_, p)| !p.success)
        .map(|(r, p)| FailedEpisode {
            id: r.id.clone(),
            activity: p.activity.name.clone(),
            steps: p.steps.len(),
            stats: p.stats.clone(),
        })
        .collect();
    for f in &failures {
        let open: Vec<String> = f.stats.remaining.iter().map(|p| p.to_string()).collect();
        eprintln!(
            "[collect] unsolved {}: {} steps, {} simulations, {} nodes, depth {}, open: {}",
            f.id,
            f.steps,
            f.stats.simulations,
            f.stats.nodes_expanded,
            f.stats.max_tree_depth,
            open.join(", ")
        );
    }
    let trace_steps: usize = traces.iter().filter_map(|r| r.as_explore()).map(|t| t.steps.len()).sum();
    let mean = |total: usize, n: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let summary = CollectSummary {
        episodes: eps.len(),
        successes: solved.len(),
        success_rate: mean(solved.len(), eps.len()),
        mean_plan_length: mean(solved.iter().sum(), solved.len()),
        traces: traces.len(),
        mean_trace_length: mean(trace_steps, traces.len()),
        failures,
    };

    let records: Vec<ExperienceRecord> = plans.into_iter().chain(traces).collect();
    let mut write = || -> anyhow::Result<()> {
        write_jsonl(&cfg.out.join(EXPERIENCES), &records)?;
        write_json(&cfg.out.join(COLLECT_SUMMARY), &summary)?;
        let counts = BTreeMap::from([("plan".to_string(), summary.episodes), ("explore".to_string(), summary.traces)]);
        manifest.record(&cfg.out, EXPERIENCES, STAGE, counts)?;
        manifest.record(&cfg.out, COLLECT_SUMMARY, STAGE, BTreeMap::new())?;
        manifest.save(&cfg.out)
    };
    write().map_err(usage(STAGE))?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileSummary {
    pub train_counts: BTreeMap<String, usize>,
    pub eval_counts: BTreeMap<String, usize>,
    pub oracle: OracleReport,
}

/// Compiles training data from an experience stream and generates the
/// evaluation suite, auditing its golds with the replay oracle.
pub fn compile(cfg: &PipelineConfig, experiences: Option<&Path>) -> Result<CompileSummary, CliError> {
    const STAGE: &str = "compile";
    let mut manifest = open_out(cfg, STAGE)?;
    let path = experiences.map(Path::to_path_buf).unwrap_or_else(|| cfg.out.join(EXPERIENCES));
    let records: Vec<ExperienceRecord> = read_jsonl(&path).map_err(|e| usage(STAGE)(e.into()))?;
    if records.is_empty() {
        return Err(invalid(STAGE)(anyhow!("{} holds no experiences", path.display())));
    }
    if !records.iter().any(|r| r.as_explore().is_some()) {
        eprintln!("[compile] warning: no exploration traces; counting and path-tracking data will be empty");
    }
    let catalog = cfg.catalog().map_err(invalid(STAGE))?;
    let library = cfg.library(&catalog).map_err(invalid(STAGE))?;
    let split = cfg.split(&library);
    let mixture = homeworld::compile::MixtureConfig { seed: cfg.stage_seed("compile/mixture"), ..cfg.mixture.clone() };
    let eval_seed = cfg.stage_seed("compile/eval");
    let (train, suite) = with_jobs(cfg.jobs, || -> anyhow::Result<_> {
        let train = compile_training(&records, &library, &split, &mixture)?;
        let suite = generate_eval_suite(&catalog, &library, &split, &cfg.eval_config(), eval_seed)?;
        Ok((train, suite))
    })
    .and_then(|r| r)
    .map_err(invalid(STAGE))?;
    let oracle = with_jobs(cfg.jobs, || verify_suite(&suite, &library)).map_err(usage(STAGE))?;

    let hash = cfg.hash();
    let mut write = || -> anyhow::Result<CompileSummary> {
        write_json(&cfg.out.join(SPLIT), &split)?;
        let tm = emit_dataset(&train, &cfg.out.join(TRAIN), mixture.seed, &hash)?;
        let em = emit_dataset(&suite.examples, &cfg.out.join(EVAL), eval_seed, &hash)?;
        write_jsonl(&cfg.out.join(EVAL_SOURCES), &suite.sources)?;
        write_json(&cfg.out.join(ORACLE_REPORT), &oracle)?;
        manifest.record(&cfg.out, SPLIT, STAGE, BTreeMap::new())?;
        manifest.record(&cfg.out, TRAIN, STAGE, tm.counts.clone())?;
        manifest.record(&cfg.out, EVAL, STAGE, em.counts.clone())?;
        manifest.record(&cfg.out, EVAL_SOURCES, STAGE, BTreeMap::new())?;
        manifest.record(&cfg.out, ORACLE_REPORT, STAGE, BTreeMap::new())?;
        manifest.stage_seeds.insert("compile/mixture".into(), mixture.seed);
        manifest.stage_seeds.insert("compile/eval".into(), eval_seed);
        manifest.stage_seeds.insert("split".into(), cfg.stage_seed("split"));
        manifest.save(&cfg.out)?;
        Ok(CompileSummary { train_counts: tm.counts, eval_counts: em.counts, oracle: oracle.clone() })
    };
    let summary = write().map_err(usage(STAGE))?;
    oracle_verdict(&summary.oracle, STAGE)?;
    Ok(summary)
}

fn oracle_verdict(report: &OracleReport, stage: &'static str) -> Result<(), CliError> {
    if report.mismatches.is_empty() {
        return Ok(());
    }
    let shown: Vec<String> = report
        .mismatches
        .iter()
        .take(5)
        .map(|m| format!("{}: gold `{}`, replay `{}`", m.id, m.expected, m.found))
        .collect();
    Err(CliError::new(
        ExitKind::Oracle,
        stage,
        anyhow!(
            "{} of {} gold answers disagree with replay: {}",
            report.mismatches.len(),
            report.checked_total(),
            shown.join("; ")
        ),
    ))
}

/// Scores a prediction file against an eval set and records the reports.
pub fn score(cfg: &PipelineConfig, predictions: &Path, eval: Option<&Path>) -> Result<Vec<ScoreReport>, CliError> {
    const STAGE: &str = "score";
    let eval = eval.map(Path::to_path_buf).unwrap_or_else(|| cfg.out.join(EVAL));
    let reports = score_file(predictions, &eval).map_err(|e| match e {
        MetricError::Read(_) => usage(STAGE)(e.into()),
        other => invalid(STAGE)(other.into()),
    })?;
    let mut manifest = open_out(cfg, STAGE)?;
    let mut write = || -> anyhow::Result<()> {
        write_json(&cfg.out.join(SCORES), &reports)?;
        manifest.record(&cfg.out, SCORES, STAGE, BTreeMap::new())?;
        manifest.save(&cfg.out)
    };
    write().map_err(usage(STAGE))?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRun {
    pub lambda: f64,
    pub report: DemoReport,
}

/// Runs the toy continual-learning comparison for every configured seed and
/// penalty strength.
pub fn ewc_demo(cfg: &PipelineConfig, lambdas: &[f64], seeds: &[u64]) -> Result<Vec<DemoRun>, CliError> {
    const STAGE: &str = "ewc-demo";
    let lambdas = if lambdas.is_empty() { &cfg.ewc.lambdas[..] } else { lambdas };
    let seeds = if seeds.is_empty() { &cfg.ewc.seeds[..] } else { seeds };
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(invalid(STAGE)(anyhow!("lambda {l} is not a non-negative number")));
    }
    let mut manifest = open_out(cfg, STAGE)?;
    let runs: Vec<(u64, f64)> = seeds.iter().flat_map(|&s| lambdas.iter().map(move |&l| (s, l))).collect();
    let results = with_jobs(cfg.jobs, || {
        runs.par_iter()
            .map(|&(seed, lambda)| {
                let demo = DemoConfig { lambda_full: lambda, lambda_adapter: lambda, ..cfg.ewc.demo.clone() };
                toy_continual_demo(seed, &demo).map(|report| DemoRun { lambda, report })
            })
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(usage(STAGE))?
    .map_err(|e| invalid(STAGE)(e.into()))?;
    let mut write = || -> anyhow::Result<()> {
        write_json(&cfg.out.join(EWC_DEMO), &results)?;
        manifest.record(&cfg.out, EWC_DEMO, STAGE, BTreeMap::new())?;
        manifest.save(&cfg.out)
    };
    write().map_err(usage(STAGE))?;
    Ok(results)
}

/// Checks the configuration and inputs, and whatever artifacts already sit
/// in the output directory. Returns one line per check.
pub fn validate(cfg: &PipelineConfig) -> Result<Vec<String>, CliError> {
    const STAGE: &str = "validate";
    let bad = invalid(STAGE);
    let mut lines = vec![format!("config ok (hash {})", &cfg.hash()[..12])];
    let catalog = cfg.catalog().map_err(&bad)?;
    lines.push(format!("catalog {} with {} classes", catalog.version_tag(), catalog.classes().len()));
    for (i, size) in [SceneSize::Small, SceneSize::Medium, SceneSize::Large].into_iter().enumerate() {
        let scene = sample_scene(&catalog, cfg.stage_seed("validate") ^ i as u64, size);
        let problems = validate_state(&scene);
        if !problems.is_empty() {
            return Err(bad(anyhow!("sampled {size:?} scene is inconsistent: {}", problems.join("; "))));
        }
    }
    let library = cfg.library(&catalog).map_err(&bad)?;
    let split = cfg.split(&library);
    split.validate().map_err(|e| bad(e.into()))?;
    lines.push(format!("library of {} activities, {} unseen", library.len(), split.unseen.len()));

    if let Some(m) = Manifest::read(&cfg.out).map_err(&bad)? {
        let stale = m.stale(&cfg.out);
        if !stale.is_empty() {
            return Err(bad(anyhow!("files changed since they were written: {}", stale.join(", "))));
        }
        lines.push(format!("{} manifest entries match their files", m.files.len()));
    }
    let summary_path = cfg.out.join(COLLECT_SUMMARY);
    if summary_path.is_file() {
        let s: CollectSummary = serde_json::from_str(&fs::read_to_string(&summary_path).map_err(|e| bad(e.into()))?)
            .map_err(|e| bad(e.into()))?;
        if s.success_rate < cfg.collect.min_success_rate {
            return Err(bad(anyhow!(
                "planner solved {:.1}% of episodes, below {:.1}%",
                100.0 * s.success_rate,
                100.0 * cfg.collect.min_success_rate
            )));
        }
        lines.push(format!("planner success rate {:.1}%", 100.0 * s.success_rate));
    }
    let (eval_path, sources_path) = (cfg.out.join(EVAL), cfg.out.join(EVAL_SOURCES));
    if eval_path.is_file() && sources_path.is_file() {
        let examples: Vec<EvalExample> = read_dataset(&eval_path).map_err(|e| bad(e.into()))?;
        let sources: Vec<ExperienceRecord> = read_jsonl(&sources_path).map_err(|e| bad(e.into()))?;
        let report = verify_suite(&EvalSuite { examples, sources }, &library);
        oracle_verdict(&report, STAGE)?;
        lines.push(format!("{} gold answers agree with replay", report.checked_total()));
    }
    Ok(lines)
}
