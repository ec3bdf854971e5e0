//! Research: perspectives, simulated conversations and the outline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use storm_core::conversation::render_history;
use storm_core::{
    parse_outline, serialize_outline, Conversation, DialogueTurn, OrderingKey, Outline, OutlineNode, Perspective, RefId,
    ReferenceStore, RunMode, Topic,
};
use storm_lm::parse::{bullets, parse_perspectives, parse_question, parse_queries, parse_related_topics, AskerReply};
use storm_lm::{names, Bindings, LmError, ModelRole};
use storm_retrieval::wiki::toc_markup;
use storm_retrieval::{filter_trusted, SearchQuery};

use crate::config::{PrewritingConfig, Services};
use crate::PipelineError;

/// The expert's answer when no trusted source survives filtering.
pub const NO_SOURCES_ANSWER: &str = "No reliable sources found.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrewritingResult {
    pub perspectives: Vec<Perspective>,
    pub conversations: Vec<Conversation>,
    pub draft_outline: Outline,
    pub outline: Outline,
    pub references: ReferenceStore,
}

/// One finished conversation with the sources it collected, numbered locally.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationUnit {
    pub conversation: Conversation,
    pub references: ReferenceStore,
}

/// Example outlines of related pages, `Title: ...` followed by the page's
/// headings, one block per page that could be fetched.
pub fn related_examples(topic: &Topic, services: &Services) -> Result<String, PipelineError> {
    let Some(wiki) = &services.wiki else { return Ok(String::new()) };
    let reply = services.lm.complete(names::GEN_RELATED_TOPICS, &Bindings::new().set("topic", &topic.title), ModelRole::General)?;
    let titles: Vec<String> = parse_related_topics(&reply)
        .into_iter()
        .filter(|t| !t.eq_ignore_ascii_case(topic.title.trim()))
        .collect();
    let tocs: Vec<Option<String>> = std::thread::scope(|s| {
        let handles: Vec<_> = titles.iter().map(|t| s.spawn(move || wiki.fetch_toc(t))).collect();
        handles
            .into_iter()
            .map(|h| h.join().ok().flatten().filter(|toc| !toc.is_empty()).map(|toc| toc_markup(&toc)))
            .collect()
    });
    let blocks: Vec<String> = titles
        .iter()
        .zip(tocs)
        .filter_map(|(t, toc)| toc.map(|m| format!("Title: {t}\n{m}")))
        .collect();
    if blocks.is_empty() {
        log::warn!("no table of contents available for topics related to {}", topic.title);
    }
    Ok(blocks.join("\n\n"))
}

/// The basic fact writer followed by at most `cfg.n` discovered perspectives.
pub fn discover_perspectives(topic: &Topic, cfg: &PrewritingConfig, services: &Services) -> Result<Vec<Perspective>, PipelineError> {
    let mut out = vec![Perspective::basic_fact_writer()];
    if cfg.n == 0 {
        return Ok(out);
    }
    let examples = related_examples(topic, services)?;
    let bindings = Bindings::new().set("topic", &topic.title).set("examples", examples);
    let mut found = Vec::new();
    for attempt in 0..2 {
        let b = if attempt == 0 { bindings.clone() } else { bindings.clone().set("attempt", attempt.to_string()) };
        found = parse_perspectives(&services.lm.complete(names::GEN_PERSPECTIVES, &b, ModelRole::General)?);
        if !found.is_empty() {
            break;
        }
    }
    if found.is_empty() {
        log::warn!("no perspectives parsed for {}; using the basic fact writer only", topic.title);
    }
    found.truncate(cfg.n);
    out.extend(found);
    Ok(out)
}

/// Stand-in personas for the no-perspective mode; they only label the
/// conversations and never reach a prompt.
pub fn anonymous_perspectives(n: usize) -> Vec<Perspective> {
    (0..=n)
        .map(|i| Perspective { summary: format!("Writer {}", i + 1), description: String::new(), index: i as u32 })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Question {
    Ask(String),
    End,
}

/// Next question of a conversation. `perspective` is `None` in the
/// no-perspective ablation. Empty output is retried once and then ends the
/// conversation.
pub fn gen_question(
    topic: &Topic,
    perspective: Option<&Perspective>,
    history: &[DialogueTurn],
    conversation: usize,
    services: &Services,
) -> Result<Question, PipelineError> {
    let mut keep = history.len();
    loop {
        let conv = render_history(&history[history.len() - keep..]);
        let mut b = Bindings::new().set("topic", &topic.title).set("conv", conv).set("conversation", conversation.to_string());
        let template = match perspective {
            Some(p) => {
                b = b.set("persona", p.persona());
                names::GEN_QUESTION
            }
            None => names::GEN_QUESTION_NO_PERSPECTIVE,
        };
        let text = match services.lm.complete(template, &b, ModelRole::QuestionAsker) {
            Ok(t) => t,
            Err(LmError::ContextLengthExceeded { .. }) if keep > 0 => {
                keep /= 2;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let reply = match parse_question(&text) {
            AskerReply::Empty => parse_question(&services.lm.complete(template, &b.set("attempt", "1"), ModelRole::QuestionAsker)?),
            r => r,
        };
        return Ok(match reply {
            AskerReply::Question(q) => Question::Ask(q),
            AskerReply::End | AskerReply::Empty => Question::End,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub text: String,
    pub source_ids: Vec<RefId>,
}

/// Breaks the question into queries, searches, keeps trusted results in
/// `store` and has the expert answer from their snippets.
pub fn answer_question(
    topic: &Topic,
    question: &str,
    cfg: &PrewritingConfig,
    services: &Services,
    store: &mut ReferenceStore,
    key: OrderingKey,
) -> Result<Answer, PipelineError> {
    let b = Bindings::new().set("topic", &topic.title).set("question", question);
    let queries = parse_queries(&services.lm.complete(names::GEN_QUERIES, &b, ModelRole::General)?, question, cfg.max_queries_per_question);
    let mut ids: Vec<RefId> = Vec::new();
    let mut failures = 0;
    let mut last_error = None;
    for (rank, text) in queries.iter().enumerate() {
        let Some(q) = SearchQuery::new(text, question, OrderingKey { rank: rank as u32, ..key }) else { continue };
        match services.searcher.search(&q, cfg.search_k, topic.exclusion_url.as_deref()) {
            Ok(docs) => {
                for doc in filter_trusted(docs, &services.trust) {
                    if let Ok(id) = store.insert(doc) {
                        if !ids.contains(&id) {
                            ids.push(id);
                        }
                    }
                }
            }
            Err(e) => {
                log::warn!("search for `{text}` failed: {e}");
                failures += 1;
                last_error = Some(e);
            }
        }
    }
    if failures > 0 && failures == queries.len() {
        return Err(last_error.expect("a failure was recorded").into());
    }
    if ids.is_empty() {
        return Ok(Answer { text: NO_SOURCES_ANSWER.into(), source_ids: ids });
    }
    let info = gathered_info(store, &ids, cfg.answer_info_word_budget);
    let b = Bindings::new().set("topic", &topic.title).set("conv", question).set("info", info);
    let text = services.lm.complete(names::GEN_ANSWER, &b, ModelRole::General)?.trim().to_string();
    let text = if text.is_empty() { NO_SOURCES_ANSWER.to_string() } else { text };
    Ok(Answer { text, source_ids: ids })
}

/// Snippets of `ids` in order, stopping once `budget` words are used. The
/// first snippet is always included.
fn gathered_info(store: &ReferenceStore, ids: &[RefId], budget: usize) -> String {
    let mut parts: Vec<&str> = Vec::new();
    let mut words = 0;
    for doc in ids.iter().filter_map(|id| store.get(*id)) {
        for s in &doc.snippets {
            let w = s.split_whitespace().count();
            if !parts.is_empty() && words + w > budget {
                return parts.join("\n\n");
            }
            words += w;
            parts.push(s);
        }
    }
    parts.join("\n\n")
}

/// Up to `cfg.m` question/answer rounds from one perspective. Sources are
/// collected into a store local to the conversation.
pub fn simulate_conversation(
    topic: &Topic,
    perspective: &Perspective,
    use_perspective: bool,
    cfg: &PrewritingConfig,
    services: &Services,
) -> (ConversationUnit, usize) {
    let mut conv = Conversation::new(perspective.clone());
    let mut store = ReferenceStore::with_exclusion(topic.exclusion_url.clone());
    let mut failed = 0;
    let idx = perspective.index as usize;
    for round in 1..=cfg.m as u32 {
        let asked = gen_question(topic, use_perspective.then_some(perspective), &conv.turns, idx, services);
        let question = match asked {
            Ok(Question::Ask(q)) => q,
            Ok(Question::End) => {
                conv.terminated_early = true;
                break;
            }
            Err(e) => {
                log::warn!("conversation {idx} round {round}: question failed: {e}");
                failed += 1;
                continue;
            }
        };
        match answer_question(topic, &question, cfg, services, &mut store, OrderingKey::new(idx as u32, round, 0)) {
            Ok(a) => conv.turns.push(DialogueTurn { question, answer: a.text, source_ids: a.source_ids, round }),
            Err(e) => {
                log::warn!("conversation {idx} round {round}: answer failed: {e}");
                failed += 1;
            }
        }
    }
    (ConversationUnit { conversation: conv, references: store }, failed)
}

/// All questions of the no-conversation ablation in one request, capped at
/// `cfg.max_questions()`.
pub fn batch_questions(topic: &Topic, perspectives: &[Perspective], cfg: &PrewritingConfig, services: &Services) -> Result<Vec<String>, PipelineError> {
    let listing: Vec<String> = perspectives.iter().map(|p| format!("- {}", p.persona())).collect();
    let b = Bindings::new()
        .set("topic", &topic.title)
        .set("perspectives", listing.join("\n"))
        .set("count", cfg.max_questions().to_string());
    let mut qs = bullets(&services.lm.complete(names::GEN_QUESTIONS_BATCH, &b, ModelRole::QuestionAsker)?);
    qs.truncate(cfg.max_questions());
    Ok(qs)
}

/// Answers questions independently, grouped `m` at a time into one unit per
/// perspective slot so the conversation bounds still hold.
fn answer_batch(topic: &Topic, perspectives: &[Perspective], questions: &[String], cfg: &PrewritingConfig, services: &Services, sink: &dyn ConversationSink) -> Vec<(ConversationUnit, usize)> {
    let chunks: Vec<&[String]> = questions.chunks(cfg.m).take(perspectives.len()).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .iter()
            .enumerate()
            .map(|(i, chunk)| {
                let p = &perspectives[i];
                s.spawn(move || {
                    if let Some(done) = sink.existing(i) {
                        return (done, 0);
                    }
                    let mut conv = Conversation::new(p.clone());
                    let mut store = ReferenceStore::with_exclusion(topic.exclusion_url.clone());
                    let mut failed = 0;
                    for (j, q) in chunk.iter().enumerate() {
                        let round = j as u32 + 1;
                        // Each question gets a fresh store so no answer sees another's sources.
                        let mut own = ReferenceStore::with_exclusion(topic.exclusion_url.clone());
                        match answer_question(topic, q, cfg, services, &mut own, OrderingKey::new(i as u32, round, 0)) {
                            Ok(a) => {
                                let remap = store.absorb(&own);
                                let ids = a.source_ids.iter().filter_map(|id| remap.get(id).copied()).collect();
                                conv.turns.push(DialogueTurn { question: q.clone(), answer: a.text, source_ids: ids, round });
                            }
                            Err(e) => {
                                log::warn!("question {i}.{round} failed: {e}");
                                failed += 1;
                            }
                        }
                    }
                    let unit = ConversationUnit { conversation: conv, references: store };
                    sink.completed(i, &unit);
                    (unit, failed)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("answer task panicked")).collect()
    })
}

/// Where finished conversations are persisted, and where a resumed run finds
/// the ones it already has.
pub trait ConversationSink: Sync {
    fn existing(&self, index: usize) -> Option<ConversationUnit>;
    fn completed(&self, index: usize, unit: &ConversationUnit);
}

pub struct NoSink;

impl ConversationSink for NoSink {
    fn existing(&self, _: usize) -> Option<ConversationUnit> {
        None
    }
    fn completed(&self, _: usize, _: &ConversationUnit) {}
}

/// Runs one conversation per perspective concurrently.
pub fn run_conversations(
    topic: &Topic,
    perspectives: &[Perspective],
    use_perspective: bool,
    cfg: &PrewritingConfig,
    services: &Services,
    sink: &dyn ConversationSink,
) -> Vec<(ConversationUnit, usize)> {
    std::thread::scope(|s| {
        let handles: Vec<_> = perspectives
            .iter()
            .enumerate()
            .map(|(i, p)| {
                s.spawn(move || {
                    if let Some(done) = sink.existing(i) {
                        return (done, 0);
                    }
                    let out = simulate_conversation(topic, p, use_perspective, cfg, services);
                    sink.completed(i, &out.0);
                    out
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("conversation task panicked")).collect()
    })
}

/// Folds per-conversation stores into one, in conversation order, and
/// rewrites every turn's source ids to the merged numbering.
pub fn merge_units(topic: &Topic, units: Vec<ConversationUnit>) -> (Vec<Conversation>, ReferenceStore) {
    let mut global = ReferenceStore::with_exclusion(topic.exclusion_url.clone());
    let mut convs = Vec::with_capacity(units.len());
    for mut unit in units {
        let remap: BTreeMap<RefId, RefId> = global.absorb(&unit.references);
        for turn in &mut unit.conversation.turns {
            turn.source_ids = turn.source_ids.iter().filter_map(|id| remap.get(id).copied()).collect();
        }
        convs.push(unit.conversation);
    }
    (convs, global)
}

pub fn outline_fallback(topic: &Topic) -> Outline {
    Outline::new(vec![OutlineNode::new(topic.title.clone(), 1)])
}

fn parse_model_outline(text: &str, topic: &Topic) -> Outline {
    let parsed = parse_outline(text);
    if parsed.warnings() > 0 {
        log::debug!("outline repaired: {} skipped, {} empty, {} clamped", parsed.skipped_lines, parsed.empty_headings, parsed.clamped);
    }
    parsed.outline.strip_title(&topic.title)
}

/// Outline from the topic alone.
pub fn draft_outline(topic: &Topic, services: &Services) -> Result<Outline, PipelineError> {
    let b = Bindings::new().set("topic", &topic.title);
    for attempt in 0..2 {
        let b = if attempt == 0 { b.clone() } else { b.clone().set("attempt", "1") };
        let outline = parse_model_outline(&services.lm.complete(names::DIRECT_GEN_OUTLINE, &b, ModelRole::General)?, topic);
        if !outline.is_empty() {
            return Ok(outline);
        }
    }
    log::warn!("empty draft outline for {}; falling back to the title", topic.title);
    Ok(outline_fallback(topic))
}

/// Transcript lines of every turn in conversation order, oldest dropped
/// first until at most `budget` words remain.
pub fn truncated_transcript(convs: &[Conversation], budget: usize) -> String {
    let turns: Vec<String> = convs.iter().flat_map(|c| c.turns.iter()).map(|t| render_history(std::slice::from_ref(t))).collect();
    let mut words: usize = turns.iter().map(|t| t.split_whitespace().count()).sum();
    let mut start = 0;
    while start < turns.len() && words > budget {
        words -= turns[start].split_whitespace().count();
        start += 1;
    }
    if start == turns.len() {
        return "N/A".into();
    }
    turns[start..].join("\n")
}

/// Draft improved with what the conversations surfaced; the draft itself if
/// the model's outline is empty.
pub fn refine_outline(topic: &Topic, draft: &Outline, convs: &[Conversation], cfg: &PrewritingConfig, services: &Services) -> Result<Outline, PipelineError> {
    let mut budget = cfg.transcript_word_budget;
    loop {
        let b = Bindings::new()
            .set("topic", &topic.title)
            .set("conv", truncated_transcript(convs, budget))
            .set("old_outline", serialize_outline(draft));
        match services.lm.complete(names::REFINE_OUTLINE, &b, ModelRole::General) {
            Ok(text) => {
                let outline = parse_model_outline(&text, topic);
                return Ok(if outline.is_empty() { draft.clone() } else { outline });
            }
            Err(LmError::ContextLengthExceeded { .. }) if budget > 0 => budget /= 2,
            Err(e) => return Err(e.into()),
        }
    }
}

/// Perspectives and conversations for `mode`; the caller merges and outlines.
pub fn research_conversations(
    topic: &Topic,
    mode: RunMode,
    perspectives: &[Perspective],
    cfg: &PrewritingConfig,
    services: &Services,
    sink: &dyn ConversationSink,
) -> Result<Vec<ConversationUnit>, PipelineError> {
    let results = match mode {
        RunMode::Storm | RunMode::StormNoOutline => run_conversations(topic, perspectives, true, cfg, services, sink),
        RunMode::StormNoPerspective => run_conversations(topic, perspectives, false, cfg, services, sink),
        RunMode::StormNoConversation => {
            let questions = batch_questions(topic, perspectives, cfg, services)?;
            answer_batch(topic, perspectives, &questions, cfg, services, sink)
        }
        other => return Err(PipelineError::Invalid(format!("mode {other} has no conversation stage"))),
    };
    let failed: usize = results.iter().map(|r| r.1).sum();
    let turns: usize = results.iter().map(|r| r.0.conversation.turns.len()).sum();
    if turns == 0 && failed > 0 {
        return Err(PipelineError::NoResearch(format!("all {failed} research rounds failed; check the model and search endpoints")));
    }
    Ok(results.into_iter().map(|r| r.0).collect())
}

pub fn perspectives_for(topic: &Topic, mode: RunMode, cfg: &PrewritingConfig, services: &Services) -> Result<Vec<Perspective>, PipelineError> {
    match mode {
        RunMode::StormNoPerspective => Ok(anonymous_perspectives(cfg.n)),
        _ => discover_perspectives(topic, cfg, services),
    }
}

/// The whole research stage for a storm-family mode.
pub fn run_prewriting(topic: &Topic, cfg: &PrewritingConfig, mode: RunMode, services: &Services) -> Result<PrewritingResult, PipelineError> {
    cfg.validate()?;
    let perspectives = perspectives_for(topic, mode, cfg, services)?;
    let units = research_conversations(topic, mode, &perspectives, cfg, services, &NoSink)?;
    let (conversations, references) = merge_units(topic, units);
    let draft_outline = draft_outline(topic, services)?;
    let outline = refine_outline(topic, &draft_outline, &conversations, cfg, services)?;
    Ok(PrewritingResult { perspectives, conversations, draft_outline, outline, references })
}
