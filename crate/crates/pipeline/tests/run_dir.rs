use storm_core::{CoreError, RunDir, RunMode, Stage};
use storm_lm::{names, CallRecord};
use storm_pipeline::run::{self, conversation_file};
use storm_pipeline::{PipelineError, PrewritingConfig, WritingConfig};
use storm_testkit::{new_run, sim_services};

fn cfgs() -> (PrewritingConfig, WritingConfig) {
    (PrewritingConfig::default(), WritingConfig::default())
}

#[test]
fn research_then_write_produces_artifacts() {
    let (cfg, wcfg) = cfgs();
    let tmp = tempfile::tempdir().unwrap();
    let s = sim_services();
    let mut dir = new_run(tmp.path(), RunMode::Storm, &cfg, &wcfg);
    run::research(&mut dir, &cfg, &s).unwrap();
    for name in [run::PERSPECTIVES, run::CONVERSATIONS, run::REFERENCES, run::OUTLINE_DRAFT, run::OUTLINE, run::LM_CALLS_PREWRITING] {
        assert!(dir.has_artifact(name), "{name}");
    }
    assert!(dir.has_artifact(&conversation_file(0)));
    let calls_before = s.lm.call_count();
    run::research(&mut dir, &cfg, &s).unwrap();
    assert_eq!(s.lm.call_count(), calls_before, "completed research must not rerun");

    let prewriting_bytes = std::fs::read(dir.path_of(run::OUTLINE)).unwrap();
    let article = run::write(&mut dir, &wcfg, &s).unwrap();
    for name in [run::ARTICLE_MD, run::ARTICLE_JSON, run::ARTICLE_DRAFT, run::WRITING_STATS, run::LM_CALLS_WRITING] {
        assert!(dir.has_artifact(name), "{name}");
    }
    assert_eq!(std::fs::read(dir.path_of(run::OUTLINE)).unwrap(), prewriting_bytes);
    assert_eq!(dir.read_text(run::ARTICLE_MD).unwrap(), article.to_markdown());
    let calls: Vec<CallRecord> = dir.read_json(run::LM_CALLS_WRITING).unwrap();
    assert!(calls.iter().all(|c| c.template != names::GEN_QUESTION));
    assert!(calls.windows(2).all(|w| (&w[0].template, &w[0].bindings_hash) <= (&w[1].template, &w[1].bindings_hash)));

    let reopened = RunDir::open(dir.root()).unwrap();
    assert!(reopened.record().is_complete(Stage::Writing));
    let mut reopened = reopened;
    assert!(matches!(reopened.write_artifact(run::OUTLINE, Stage::Prewriting, b"# X"), Err(CoreError::StageSealed { .. })));
}

#[test]
fn write_requires_research() {
    let (cfg, wcfg) = cfgs();
    let tmp = tempfile::tempdir().unwrap();
    let mut dir = new_run(tmp.path(), RunMode::Storm, &cfg, &wcfg);
    let err = run::write(&mut dir, &wcfg, &sim_services()).unwrap_err();
    assert!(matches!(err, PipelineError::Core(CoreError::MissingArtifact(_))));
}

#[test]
fn resumes_from_saved_conversations() {
    let (cfg, wcfg) = cfgs();
    let full_base = tempfile::tempdir().unwrap();
    let s = sim_services();
    let mut full = new_run(full_base.path(), RunMode::Storm, &cfg, &wcfg);
    run::research(&mut full, &cfg, &s).unwrap();
    let full_questions = s.lm.calls().iter().filter(|c| c.template == names::GEN_QUESTION).count();

    let crashed_base = tempfile::tempdir().unwrap();
    let mut crashed = new_run(crashed_base.path(), RunMode::Storm, &cfg, &wcfg);
    crashed.write_artifact(run::PERSPECTIVES, Stage::Prewriting, &std::fs::read(full.path_of(run::PERSPECTIVES)).unwrap()).unwrap();
    for i in [0, 1, 3, 4, 5] {
        let name = conversation_file(i);
        crashed.write_artifact(&name, Stage::Prewriting, &std::fs::read(full.path_of(&name)).unwrap()).unwrap();
    }
    let s2 = sim_services();
    run::research(&mut crashed, &cfg, &s2).unwrap();
    let resumed_questions = s2.lm.calls().iter().filter(|c| c.template == names::GEN_QUESTION).count();
    assert!(resumed_questions < full_questions);
    assert!(s2.lm.calls().iter().all(|c| c.template != names::GEN_PERSPECTIVES));
    for name in [run::CONVERSATIONS, run::REFERENCES, run::OUTLINE] {
        assert_eq!(crashed.read_text(name).unwrap(), full.read_text(name).unwrap(), "{name}");
    }
}

#[test]
fn baseline_run_dirs() {
    let (cfg, wcfg) = cfgs();
    for mode in [RunMode::DirectGen, RunMode::Rag, RunMode::Orag, RunMode::RagExpand, RunMode::StormNoOutline] {
        let tmp = tempfile::tempdir().unwrap();
        let mut dir = new_run(tmp.path(), mode, &cfg, &wcfg);
        let s = sim_services();
        run::research(&mut dir, &cfg, &s).unwrap();
        let article = run::write(&mut dir, &wcfg, &s).unwrap();
        assert!(article.citations_resolve(), "{mode}");
        assert_eq!(dir.has_artifact(run::OUTLINE_DRAFT), matches!(mode, RunMode::RagExpand | RunMode::StormNoOutline), "{mode}");
        assert_eq!(dir.has_artifact(run::CONVERSATIONS), mode == RunMode::StormNoOutline);
    }
}
