use std::sync::Arc;

use storm_core::{RunDir, RunMode, Stage};
use storm_eval::{evaluate_run, CapitalizedSpans, EntailmentJudge, EvalError, Evaluator, GroundTruth, HeadingSet, LmJudge, MetricsReport, SubstringJudge, METRICS};
use storm_pipeline::{run, PrewritingConfig, WritingConfig};
use storm_retrieval::HashEmbedder;
use storm_testkit::{new_run, run_mode, sim_services, world};

fn truth() -> GroundTruth {
    GroundTruth { title: world::TOPIC.into(), headings: HeadingSet::new(world::ground_truth_headings()), text: world::ground_truth_text() }
}

fn storm_run(base: &std::path::Path) -> RunDir {
    run_mode(base, RunMode::Storm, &PrewritingConfig::default(), &WritingConfig::default(), &sim_services()).unwrap()
}

fn eval_with(dir: &mut RunDir, truth: Option<&GroundTruth>, judge: Option<&dyn EntailmentJudge>) -> Result<MetricsReport, EvalError> {
    let embedder = HashEmbedder::default();
    evaluate_run(dir, truth, &Evaluator { embedder: &embedder, ner: &CapitalizedSpans, judge })
}

#[test]
fn full_run_reports_every_metric() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = storm_run(tmp.path());
    let services = sim_services();
    let judge = LmJudge::new(Arc::clone(&services.lm));
    let report = eval_with(&mut dir, Some(&truth()), Some(&judge)).unwrap();
    assert!(report.unavailable.is_empty(), "{:?}", report.unavailable);
    let soft = report.soft_heading_recall.unwrap();
    assert!(soft > 0.0 && soft <= 1.0 + 1e-9);
    assert!(report.rouge1.unwrap().f1 > 0.0);
    assert!(report.citation_recall.unwrap() > 50.0);
    let stored: serde_json::Value = dir.read_json(METRICS).unwrap();
    for key in ["soft_heading_recall", "heading_entity_recall", "rouge1", "rougeL", "article_entity_recall", "citation_recall", "citation_precision", "uncited_sentence_count"] {
        assert!(!stored[key].is_null(), "{key} missing");
    }
    assert!(stored["rouge1"]["f1"].is_number());
    let table = report.to_table();
    assert!(table.contains("citation_recall") && !table.contains("n/a"));
}

#[test]
fn outline_only_run_has_outline_metrics_only() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = new_run(tmp.path(), RunMode::Storm, &PrewritingConfig::default(), &WritingConfig::default());
    run::research(&mut dir, &PrewritingConfig::default(), &sim_services()).unwrap();
    let report = eval_with(&mut dir, Some(&truth()), Some(&SubstringJudge)).unwrap();
    assert!(report.soft_heading_recall.is_some() && report.heading_entity_recall.is_some());
    assert!(report.rouge1.is_none() && report.citation_recall.is_none());
    assert_eq!(report.unavailable["rouge1"], "no article");
}

#[test]
fn no_judge_marks_citations_unavailable() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = storm_run(tmp.path());
    let report = eval_with(&mut dir, Some(&truth()), None).unwrap();
    assert_eq!((report.citation_recall, report.citation_precision), (None, None));
    assert_eq!(report.unavailable["citation_recall"], "no judge configured");
    assert!(report.rouge1.is_some());
    assert!(report.to_table().contains("n/a (no judge configured)"));
}

#[test]
fn missing_ground_truth_keeps_citation_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = storm_run(tmp.path());
    let report = eval_with(&mut dir, None, Some(&SubstringJudge)).unwrap();
    assert!(report.soft_heading_recall.is_none() && report.rouge1.is_none());
    assert!(report.citation_recall.is_some());
}

struct Down;
impl EntailmentJudge for Down {
    fn supports(&self, _: &[String], _: &str) -> Result<Vec<bool>, EvalError> {
        Err(EvalError::Judge("connection refused".into()))
    }
}

#[test]
fn judge_failure_is_unavailable_not_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = storm_run(tmp.path());
    let report = eval_with(&mut dir, Some(&truth()), Some(&Down)).unwrap();
    assert_eq!(report.citation_recall, None);
    assert!(report.unavailable["citation_precision"].contains("connection refused"));
}

#[test]
fn evaluation_can_be_repeated() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = storm_run(tmp.path());
    let a = eval_with(&mut dir, Some(&truth()), Some(&SubstringJudge)).unwrap();
    let b = eval_with(&mut dir, Some(&truth()), Some(&SubstringJudge)).unwrap();
    assert_eq!(a, b);
    assert_eq!(dir.record().artifacts[METRICS], Stage::Evaluation);
}

#[test]
fn empty_run_is_missing_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = new_run(tmp.path(), RunMode::Storm, &PrewritingConfig::default(), &WritingConfig::default());
    assert!(matches!(eval_with(&mut dir, Some(&truth()), None), Err(EvalError::Core(storm_core::CoreError::MissingArtifact(_)))));
}
