//! Stage drivers that read and write a run directory.

use std::sync::Mutex;

use storm_core::{parse_outline, serialize_outline, Article, Conversation, Outline, Perspective, ReferenceStore, RunDir, RunMode, Stage};
use storm_lm::CallRecord;

use crate::baselines::{baseline_research, baseline_write, BaselineResearch};
use crate::config::{PrewritingConfig, Services, WritingConfig};
use crate::prewriting::{draft_outline, merge_units, perspectives_for, refine_outline, research_conversations, ConversationSink, ConversationUnit};
use crate::writing::{render_sections, write_from_conversations, write_storm_article, WrittenArticle};
use crate::PipelineError;

pub const PERSPECTIVES: &str = "perspectives.json";
pub const CONVERSATIONS: &str = "conversations.json";
pub const REFERENCES: &str = "references.json";
pub const OUTLINE_DRAFT: &str = "outline_draft.txt";
pub const OUTLINE: &str = "outline.txt";
pub const ARTICLE_DRAFT: &str = "article_draft.md";
pub const ARTICLE_MD: &str = "article.md";
pub const ARTICLE_JSON: &str = "article.json";
pub const WRITING_STATS: &str = "writing_stats.json";
pub const LM_CALLS_PREWRITING: &str = "lm_calls_prewriting.json";
pub const LM_CALLS_WRITING: &str = "lm_calls_writing.json";

pub fn conversation_file(index: usize) -> String {
    format!("conversations/conv_{index}.json")
}

struct DirSink<'a> {
    dir: Mutex<&'a mut RunDir>,
}

impl ConversationSink for DirSink<'_> {
    fn existing(&self, index: usize) -> Option<ConversationUnit> {
        let dir = self.dir.lock().expect("run dir lock poisoned");
        let name = conversation_file(index);
        if !dir.has_artifact(&name) {
            return None;
        }
        match dir.read_json(&name) {
            Ok(unit) => {
                log::info!("resuming with saved conversation {index}");
                Some(unit)
            }
            Err(e) => {
                log::warn!("ignoring unreadable {name}: {e}");
                None
            }
        }
    }

    fn completed(&self, index: usize, unit: &ConversationUnit) {
        let mut dir = self.dir.lock().expect("run dir lock poisoned");
        if let Err(e) = dir.write_json(&conversation_file(index), Stage::Prewriting, unit) {
            log::warn!("could not save conversation {index}: {e}");
        }
    }
}

fn write_text(dir: &mut RunDir, name: &str, stage: Stage, text: &str) -> Result<(), PipelineError> {
    let mut t = text.trim_end().to_string();
    t.push('\n');
    dir.write_artifact(name, stage, t.as_bytes())?;
    Ok(())
}

/// Calls logged since `start`, in a stable order for the artifact file.
fn calls_since(services: &Services, start: usize) -> Vec<CallRecord> {
    let mut calls: Vec<CallRecord> = services.lm.calls().into_iter().skip(start).collect();
    calls.sort_by(|a, b| (&a.template, &a.bindings_hash).cmp(&(&b.template, &b.bindings_hash)));
    calls
}

/// Runs the research stage of the run's mode unless it is already complete.
pub fn research(dir: &mut RunDir, cfg: &PrewritingConfig, services: &Services) -> Result<(), PipelineError> {
    if dir.record().is_complete(Stage::Prewriting) {
        log::info!("prewriting already complete in {}", dir.root().display());
        return Ok(());
    }
    cfg.validate()?;
    services.lm.ensure_configured()?;
    let start = services.lm.call_count();
    let topic = dir.record().topic.clone();
    let mode = dir.record().mode;
    if mode.is_storm_family() {
        let perspectives: Vec<Perspective> = if dir.has_artifact(PERSPECTIVES) {
            dir.read_json(PERSPECTIVES)?
        } else {
            let p = perspectives_for(&topic, mode, cfg, services)?;
            dir.write_json(PERSPECTIVES, Stage::Prewriting, &p)?;
            p
        };
        let units = {
            let sink = DirSink { dir: Mutex::new(&mut *dir) };
            research_conversations(&topic, mode, &perspectives, cfg, services, &sink)?
        };
        let (conversations, references) = merge_units(&topic, units);
        dir.write_json(CONVERSATIONS, Stage::Prewriting, &conversations)?;
        dir.write_json(REFERENCES, Stage::Prewriting, &references)?;
        let draft = draft_outline(&topic, services)?;
        write_text(dir, OUTLINE_DRAFT, Stage::Prewriting, &serialize_outline(&draft))?;
        let outline = refine_outline(&topic, &draft, &conversations, cfg, services)?;
        write_text(dir, OUTLINE, Stage::Prewriting, &serialize_outline(&outline))?;
    } else {
        let r = baseline_research(&topic, mode, cfg, services)?;
        if let Some(d) = &r.draft_outline {
            write_text(dir, OUTLINE_DRAFT, Stage::Prewriting, &serialize_outline(d))?;
        }
        dir.write_json(REFERENCES, Stage::Prewriting, &r.references)?;
        write_text(dir, OUTLINE, Stage::Prewriting, &serialize_outline(&r.outline))?;
    }
    dir.write_json(LM_CALLS_PREWRITING, Stage::Prewriting, &calls_since(services, start))?;
    dir.complete_stage(Stage::Prewriting)?;
    Ok(())
}

pub fn load_outline(dir: &RunDir) -> Result<Outline, PipelineError> {
    Ok(parse_outline(&dir.read_text(OUTLINE)?).outline)
}

/// Runs the writing stage from the research artifacts.
pub fn write(dir: &mut RunDir, cfg: &WritingConfig, services: &Services) -> Result<Article, PipelineError> {
    if dir.record().is_complete(Stage::Writing) {
        return Ok(dir.read_json(ARTICLE_JSON)?);
    }
    if !dir.record().is_complete(Stage::Prewriting) {
        return Err(storm_core::CoreError::MissingArtifact(format!("{OUTLINE} (research has not completed)")).into());
    }
    cfg.validate()?;
    services.lm.ensure_configured()?;
    let start = services.lm.call_count();
    let topic = dir.record().topic.clone();
    let mode = dir.record().mode;
    let references: ReferenceStore = dir.read_json(REFERENCES)?;
    let outline = load_outline(dir)?;
    let written: WrittenArticle = match mode {
        RunMode::StormNoOutline => {
            let convs: Vec<Conversation> = dir.read_json(CONVERSATIONS)?;
            write_from_conversations(&topic, &convs, &references, cfg, services)?
        }
        m if m.is_storm_family() => write_storm_article(&topic, &outline, &references, cfg, services)?,
        m => {
            let r = BaselineResearch { draft_outline: None, outline, references };
            baseline_write(&topic, m, &r, cfg, services)?
        }
    };
    write_text(dir, ARTICLE_DRAFT, Stage::Writing, &render_sections(&written.draft))?;
    dir.write_artifact(ARTICLE_MD, Stage::Writing, written.article.to_markdown().as_bytes())?;
    dir.write_json(ARTICLE_JSON, Stage::Writing, &written.article)?;
    dir.write_json(WRITING_STATS, Stage::Writing, &written.stats)?;
    dir.write_json(LM_CALLS_WRITING, Stage::Writing, &calls_since(services, start))?;
    dir.complete_stage(Stage::Writing)?;
    Ok(written.article)
}
