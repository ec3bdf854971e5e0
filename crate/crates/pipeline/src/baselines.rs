//! Comparison systems: direct generation and retrieval-augmented writers.

use storm_core::{serialize_outline, OrderingKey, Outline, RefId, ReferenceStore, RunMode, Topic};
use storm_lm::{names, Bindings, ModelRole};
use storm_retrieval::{filter_trusted, SearchQuery};

use crate::config::{PrewritingConfig, Services, WritingConfig};
use crate::markup::{fill_forest, skeleton_forest};
use crate::prewriting::{draft_outline, outline_fallback};
use crate::writing::{finish_article, is_prose_section, numbered_info, write_storm_article, WritingStats, WrittenArticle};
use crate::PipelineError;

/// What a baseline's research step leaves for its writer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineResearch {
    /// Only the expanding variant has a first outline it refines.
    pub draft_outline: Option<Outline>,
    pub outline: Outline,
    pub references: ReferenceStore,
}

/// Searches `text` and adds the trusted hits to `store`.
fn search_into(topic: &Topic, text: &str, k: usize, key: OrderingKey, store: &mut ReferenceStore, services: &Services) -> Result<usize, PipelineError> {
    let Some(q) = SearchQuery::new(text, text, key) else { return Ok(0) };
    let docs = services.searcher.search(&q, k, topic.exclusion_url.as_deref())?;
    Ok(filter_trusted(docs, &services.trust).into_iter().filter_map(|d| store.insert(d).ok()).count())
}

fn store_info(store: &ReferenceStore, budget: usize) -> String {
    numbered_info(store.iter().map(|(id, d)| (id.0, d)), budget)
}

fn parse_outline_reply(text: &str, topic: &Topic) -> Outline {
    let outline = storm_core::parse_outline(text).outline.strip_title(&topic.title);
    if outline.is_empty() {
        log::warn!("empty outline for {}; falling back to the title", topic.title);
        outline_fallback(topic)
    } else {
        outline
    }
}

/// Topic search followed by an outline written from its results.
fn rag_outline(topic: &Topic, cfg: &PrewritingConfig, services: &Services) -> Result<(Outline, ReferenceStore), PipelineError> {
    let mut store = ReferenceStore::with_exclusion(topic.exclusion_url.clone());
    search_into(topic, &topic.title, cfg.rag_search_k, OrderingKey::new(0, 0, 0), &mut store, services)?;
    let b = Bindings::new().set("topic", &topic.title).set("info", store_info(&store, cfg.answer_info_word_budget));
    let outline = parse_outline_reply(&services.lm.complete(names::RAG_OUTLINE, &b, ModelRole::General)?, topic);
    Ok((outline, store))
}

/// One search per top-level section title, results added in section order.
fn section_searches(topic: &Topic, outline: &Outline, cfg: &PrewritingConfig, store: &mut ReferenceStore, services: &Services) -> Result<usize, PipelineError> {
    let mut issued = 0;
    for (i, node) in outline.nodes.iter().enumerate().filter(|(_, n)| is_prose_section(&n.heading)) {
        let query = format!("{} {}", topic.title, node.heading);
        search_into(topic, &query, cfg.search_k, OrderingKey::new(0, i as u32 + 1, 0), store, services)?;
        issued += 1;
    }
    Ok(issued)
}

pub fn baseline_research(topic: &Topic, mode: RunMode, cfg: &PrewritingConfig, services: &Services) -> Result<BaselineResearch, PipelineError> {
    match mode {
        RunMode::DirectGen => Ok(BaselineResearch {
            draft_outline: None,
            outline: draft_outline(topic, services)?,
            references: ReferenceStore::with_exclusion(topic.exclusion_url.clone()),
        }),
        RunMode::Rag => {
            let (outline, references) = rag_outline(topic, cfg, services)?;
            Ok(BaselineResearch { draft_outline: None, outline, references })
        }
        RunMode::Orag => {
            let (outline, mut references) = rag_outline(topic, cfg, services)?;
            section_searches(topic, &outline, cfg, &mut references, services)?;
            Ok(BaselineResearch { draft_outline: None, outline, references })
        }
        RunMode::RagExpand => {
            let (first, mut references) = rag_outline(topic, cfg, services)?;
            section_searches(topic, &first, cfg, &mut references, services)?;
            let b = Bindings::new()
                .set("topic", &topic.title)
                .set("old_outline", serialize_outline(&first))
                .set("info", store_info(&references, cfg.answer_info_word_budget));
            let reply = services.lm.complete(names::RAG_EXPAND_OUTLINE, &b, ModelRole::General)?;
            let expanded = storm_core::parse_outline(&reply).outline.strip_title(&topic.title);
            let outline = if expanded.is_empty() { first.clone() } else { expanded };
            Ok(BaselineResearch { draft_outline: Some(first), outline, references })
        }
        other => Err(PipelineError::Invalid(format!("{other} is not a baseline mode"))),
    }
}

/// Whole-article writers fill the outline skeleton from one reply.
fn whole_article(topic: &Topic, outline: &Outline, store: &ReferenceStore, cfg: &WritingConfig, services: &Services, grounded: bool) -> Result<WrittenArticle, PipelineError> {
    let prose_outline = Outline::new(outline.nodes.iter().filter(|n| is_prose_section(&n.heading)).cloned().collect());
    let outline_text = serialize_outline(&prose_outline);
    let text = if grounded {
        let b = Bindings::new()
            .set("topic", &topic.title)
            .set("outline", outline_text)
            .set("info", store_info(store, cfg.article_info_word_budget));
        services.lm.complete(names::RAG_ARTICLE, &b, ModelRole::General)?
    } else {
        let b = Bindings::new().set("topic", &topic.title).set("outline", outline_text);
        services.lm.complete(names::DIRECT_GEN_ARTICLE, &b, ModelRole::General)?
    };
    let mut sections = skeleton_forest(&prose_outline);
    let resolve = |n: u32| (grounded && store.contains(RefId(n))).then_some(RefId(n));
    let prose = fill_forest(&mut sections, &text, &resolve);
    let stats = WritingStats { dropped_markers: prose.dropped_markers, ..WritingStats::default() };
    finish_article(topic, &prose_outline, sections, store, cfg, services, stats)
}

pub fn baseline_write(topic: &Topic, mode: RunMode, research: &BaselineResearch, cfg: &WritingConfig, services: &Services) -> Result<WrittenArticle, PipelineError> {
    cfg.validate()?;
    match mode {
        RunMode::DirectGen => whole_article(topic, &research.outline, &research.references, cfg, services, false),
        RunMode::Rag => whole_article(topic, &research.outline, &research.references, cfg, services, true),
        RunMode::Orag | RunMode::RagExpand => write_storm_article(topic, &research.outline, &research.references, cfg, services),
        other => Err(PipelineError::Invalid(format!("{other} is not a baseline mode"))),
    }
}
