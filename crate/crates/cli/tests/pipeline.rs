use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use homeworld::compile::{generate_eval_suite, ActivitySplit, EvalConfig, EvalCounts, EvalExample, EvalTask};
use homeworld::goals::builtin_activities;
use homeworld::metrics::{score, Metric, Prediction};
use homeworld::world::Catalog;
use homeworld_cli::commands::{EVAL, EWC_DEMO, EXPERIENCES, TRAIN};
use homeworld_cli::{collect, compile, ewc_demo, tree_hash, validate, ExitKind, Manifest, PipelineConfig};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(out: &Path, jobs: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig { seed: 5, jobs, out: out.to_path_buf(), ..Default::default() };
    cfg.collect.episodes_per_activity = 1;
    cfg.collect.traces = 16;
    cfg.planner.simulations_per_step = 60;
    cfg.eval.counts = EvalCounts::uniform(3);
    cfg.eval.shot_pool = 4;
    cfg.ewc.demo.finetune_epochs = 40;
    cfg.ewc.demo.pretrain_epochs = 80;
    cfg
}

fn run_all(cfg: &PipelineConfig) {
    collect(cfg).unwrap();
    compile(cfg, None).unwrap();
    ewc_demo(cfg, &[], &[]).unwrap();
}

#[test]
fn small_pipeline_is_deterministic_across_job_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ca, cb) = (small(a.path(), 1), small(b.path(), 2));
    run_all(&ca);
    run_all(&cb);
    assert_eq!(tree_hash(a.path()).unwrap(), tree_hash(b.path()).unwrap());

    let m = Manifest::read(a.path()).unwrap().unwrap();
    let mut on_disk: Vec<String> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    assert_eq!(m.files.keys().cloned().collect::<Vec<_>>(), on_disk);
    assert!(m.stale(a.path()).is_empty());
    assert_eq!(m.files[EXPERIENCES].counts["plan"], builtin_activities(&Catalog::builtin()).len());
    let lines = validate(&ca).unwrap();
    assert!(lines.iter().any(|l| l.contains("agree with replay")), "{lines:?}");

    // A different seed changes the artifacts.
    let c = tempfile::tempdir().unwrap();
    let cc = PipelineConfig { seed: 6, ..small(c.path(), 1) };
    collect(&cc).unwrap();
    assert_ne!(Manifest::read(c.path()).unwrap().unwrap().files[EXPERIENCES].sha256, m.files[EXPERIENCES].sha256);
}

#[test]
fn validate_catches_edits_and_wrong_golds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), 0);
    collect(&cfg).unwrap();
    compile(&cfg, None).unwrap();

    let path = dir.path().join(EVAL);
    let text = fs::read_to_string(&path).unwrap();
    let mut examples: Vec<EvalExample> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let target = examples.iter_mut().find(|e| e.task == EvalTask::CountingQa).unwrap();
    target.gold = "Ther are 9 itmes on the moon. They are nothing".into();
    let tampered: String = examples.iter().map(|e| serde_json::to_string(e).unwrap() + "\n").collect();
    fs::write(&path, tampered).unwrap();

    assert_eq!(validate(&cfg).unwrap_err().kind, ExitKind::Validation);
    fs::remove_file(dir.path().join("manifest.json")).unwrap();
    let err = validate(&cfg).unwrap_err();
    assert_eq!(err.kind, ExitKind::Oracle);
    assert!(err.to_string().contains("counting_qa/"), "{err}");
}

#[test]
fn compile_without_traces_skips_trace_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), 0);
    cfg.collect.traces = 0;
    collect(&cfg).unwrap();
    let s = compile(&cfg, None).unwrap();
    assert!(s.train_counts.contains_key("plan_generation"));
    assert!(!s.train_counts.contains_key("counting"));
    assert!(!s.train_counts.contains_key("object_path_tracking"));

    fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let err = compile(&cfg, Some(&dir.path().join("empty.jsonl"))).unwrap_err();
    assert_eq!(err.kind, ExitKind::Validation);
}

#[test]
fn random_choices_score_near_chance() {
    let catalog = std::sync::Arc::new(Catalog::builtin());
    let library = builtin_activities(&catalog);
    let split = ActivitySplit::new(&library, 0.2, 1);
    let mut counts = EvalCounts::uniform(0);
    counts.housework_qa = 1500;
    counts.negation_housework_qa = 1500;
    let cfg = EvalConfig { counts, ..Default::default() };
    let suite = generate_eval_suite(&catalog, &library, &split, &cfg, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let preds: Vec<Prediction> = suite
        .examples
        .iter()
        .map(|e| Prediction { id: e.id.clone(), output: e.choices.as_ref().unwrap().choose(&mut rng).unwrap().clone() })
        .collect();
    let reports = score(&preds, &suite.examples).unwrap();
    assert_eq!(reports.len(), 2);
    for r in reports {
        assert_eq!(r.metric, Metric::Accuracy);
        assert!((r.value - 0.25).abs() <= 0.05, "{} {}", r.task, r.value);
    }
}

#[test]
fn ewc_demo_regimes_and_lambda_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig { out: dir.path().to_path_buf(), ..Default::default() };
    let runs = ewc_demo(&cfg, &[0.0, 0.5, 2.0], &[0]).unwrap();
    assert_eq!(runs.len(), 3);
    let zero = &runs[0].report;
    assert_eq!(zero.results.len(), 4);
    use ewc_lora::Regime::*;
    let (a, e) = (zero.get(AdapterOnly), zero.get(EwcAdapter));
    assert_eq!(
        (a.task_u_loss_after.to_bits(), a.task_v_accuracy.to_bits(), a.displacement.to_bits()),
        (e.task_u_loss_after.to_bits(), e.task_v_accuracy.to_bits(), e.displacement.to_bits())
    );
    assert_eq!(zero.get(Ewc).task_u_loss_after.to_bits(), zero.get(FullFinetune).task_u_loss_after.to_bits());
    for regime in [Ewc, EwcAdapter] {
        let deg: Vec<f64> = runs.iter().map(|r| r.report.get(regime).degradation()).collect();
        assert!(deg.windows(2).all(|w| w[1] < w[0]), "{regime:?}: {deg:?}");
    }
    assert!(dir.path().join(EWC_DEMO).is_file());
    assert_eq!(ewc_demo(&cfg, &[-1.0], &[0]).unwrap_err().kind, ExitKind::Validation);
}

fn homeworld(out: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_homeworld"));
    c.env_remove("HOMEWORLD_SEED").env_remove("HOMEWORLD_SET").env("HOMEWORLD_OUT", out);
    c
}

#[test]
fn binary_exit_codes_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let counts: String = EvalTask::ALL.iter().map(|t| format!("{t} = 2\n")).collect();
    let config = dir.path().join("pipeline.toml");
    fs::write(
        &config,
        format!(
            "seed = 1\n[collect]\nepisodes_per_activity = 1\ntraces = 8\n[planner]\nsimulations_per_step = 100\n\
             [eval]\nshot_pool = 4\n[eval.counts]\n{counts}"
        ),
    )
    .unwrap();
    let status = |c: &mut Command| c.output().unwrap().status.code();

    assert_eq!(status(homeworld(&out).arg("--nonsense")), Some(1));
    assert_eq!(status(homeworld(&out).args(["--config", "/does/not/exist.toml", "validate"])), Some(1));
    assert_eq!(status(homeworld(&out).args(["--set", "planner.uct_c=-1", "validate"])), Some(2));
    assert_eq!(status(homeworld(&out).arg("--config").arg(&config).arg("collect")), Some(0));
    assert_eq!(status(homeworld(&out).arg("--config").arg(&config).arg("compile")), Some(0));
    assert_eq!(status(homeworld(&out).arg("--config").arg(&config).arg("validate")), Some(0));

    let eval: Vec<EvalExample> =
        fs::read_to_string(out.join(EVAL)).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let preds: String =
        eval.iter().skip(1).map(|e| serde_json::json!({"id": e.id, "output": e.gold}).to_string() + "\n").collect();
    fs::write(dir.path().join("preds.jsonl"), preds).unwrap();
    let o = homeworld(&out)
        .arg("--config")
        .arg(&config)
        .arg("score")
        .arg("--predictions")
        .arg(dir.path().join("preds.jsonl"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&eval[0].id));

    // The environment seed overrides the file; a different seed writes a
    // different experience stream.
    let before = Manifest::read(&out).unwrap().unwrap().files[EXPERIENCES].sha256.clone();
    let o = homeworld(&out).env("HOMEWORLD_SEED", "2").arg("--config").arg(&config).arg("collect").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let after = Manifest::read(&out).unwrap().unwrap();
    assert_eq!(after.seed, 2);
    assert_ne!(after.files[EXPERIENCES].sha256, before);
    assert!(!after.files.contains_key(TRAIN), "entries from another config are dropped");
    let counts: BTreeMap<String, usize> = after.files[EXPERIENCES].counts.clone();
    assert_eq!(counts["explore"], 8);
}
