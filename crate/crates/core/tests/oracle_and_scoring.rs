use std::sync::Arc;

use homeworld::compile::{generate_eval_suite, ActivitySplit, EvalConfig, EvalCounts, EvalTask};
use homeworld::experience::write_jsonl;
use homeworld::goals::builtin_activities;
use homeworld::metrics::{score, score_file, Metric, MetricError, Prediction};
use homeworld::oracle::{verify_suite, ORACLE_TASKS};
use homeworld::world::Catalog;

fn suite(n: usize, seed: u64) -> (homeworld::compile::EvalSuite, Vec<homeworld::goals::Activity>) {
    let c = Arc::new(Catalog::builtin());
    let lib = builtin_activities(&c);
    let split = ActivitySplit::new(&lib, 0.2, seed);
    let cfg = EvalConfig { counts: EvalCounts::uniform(n), shot_pool: 14, ..Default::default() };
    (generate_eval_suite(&c, &lib, &split, &cfg, seed).unwrap(), lib)
}

#[test]
fn replay_agrees_with_golds() {
    let (s, lib) = suite(15, 9);
    let report = verify_suite(&s, &lib);
    assert_eq!(report.checked_total(), 15 * ORACLE_TASKS.len());
    assert!(report.mismatches.is_empty(), "{:#?}", report.mismatches);
}

#[test]
fn replay_flags_tampered_golds() {
    let (mut s, lib) = suite(4, 2);
    for e in s.examples.iter_mut() {
        match e.task {
            EvalTask::CountingQa => e.gold = "99".into(),
            EvalTask::ObjectPathTrackingEval => e.gold.push_str(", garage"),
            _ => {}
        }
    }
    let report = verify_suite(&s, &lib);
    assert_eq!(report.mismatches.len(), 8, "{:#?}", report.mismatches);
}

#[test]
fn gold_predictions_score_one() {
    let (s, _) = suite(3, 4);
    let preds: Vec<Prediction> =
        s.examples.iter().map(|e| Prediction { id: e.id.clone(), output: e.gold.clone() }).collect();
    let reports = score(&preds, &s.examples).unwrap();
    assert_eq!(reports.len(), 11);
    for r in &reports {
        assert_eq!(r.value, 1.0, "{:?}", r.task);
        assert_eq!(r.n, 3);
    }
    let lcs = reports.iter().find(|r| r.task == EvalTask::ObjectPathTrackingEval).unwrap();
    assert_eq!(lcs.metric, Metric::LcsNorm);

    let dir = tempfile::tempdir().unwrap();
    let (pp, ep) = (dir.path().join("p.jsonl"), dir.path().join("e.jsonl"));
    write_jsonl(&pp, &preds).unwrap();
    write_jsonl(&ep, &s.examples).unwrap();
    assert_eq!(score_file(&pp, &ep).unwrap(), reports);
}

#[test]
fn one_wrong_answer_and_id_checks() {
    let (s, _) = suite(5, 4);
    let mut preds: Vec<Prediction> = s
        .examples
        .iter()
        .map(|e| Prediction { id: e.id.clone(), output: format!("  {} ", e.gold.to_uppercase()) })
        .collect();
    let i = s.examples.iter().position(|e| e.task == EvalTask::CountingQa).unwrap();
    preds[i].output = "banana".into();
    let reports = score(&preds, &s.examples).unwrap();
    let counting = reports.iter().find(|r| r.task == EvalTask::CountingQa).unwrap();
    assert_eq!(counting.value, 4.0 / 5.0);
    let recognition = reports.iter().find(|r| r.task == EvalTask::HouseworkQa).unwrap();
    assert_eq!(recognition.value, 1.0);

    let mut missing = preds.clone();
    missing.pop();
    assert!(matches!(score(&missing, &s.examples), Err(MetricError::MissingPrediction(_))));
    let mut extra = preds.clone();
    extra.push(Prediction { id: "nope".into(), output: String::new() });
    assert!(matches!(score(&extra, &s.examples), Err(MetricError::ExtraPrediction(_))));
}
