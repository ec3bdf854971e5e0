//! Article writing: grounded sections, polish, lead and assembly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use storm_core::tokens::words_to_tokens;
use storm_core::{extract_citations, serialize_outline, split_sentences, Article, ArticleSection, CitedSentence, Conversation, Outline, OutlineNode, RefId, ReferenceStore, SourceDocument, Topic};
use storm_lm::{names, Bindings, ModelRole};
use storm_retrieval::retrieve_for_section;

use crate::config::{SectionOrder, Services, WritingConfig};
use crate::markup::{fill_forest, outline_of, refill_exact, relevel, sections_from_markup, skeleton, ProseStats};
use crate::prewriting::truncated_transcript;
use crate::PipelineError;

/// Sections no writer should produce prose for.
const NON_PROSE_SECTIONS: &[&str] = &["references", "see also", "external links", "further reading", "notes", "bibliography", "sources", "citations"];

pub fn is_prose_section(heading: &str) -> bool {
    let h = heading.trim().to_lowercase();
    !NON_PROSE_SECTIONS.contains(&h.as_str())
}

/// Counters collected while writing, reported next to the article.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WritingStats {
    pub sections: usize,
    pub sentences: usize,
    pub uncited_sentences: usize,
    pub dropped_markers: usize,
    pub sections_without_sources: usize,
    pub polish_applied: bool,
    pub trimmed_sentences: usize,
    pub lead_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionDraft {
    pub section: ArticleSection,
    pub stats: ProseStats,
    pub sources: usize,
}

/// Numbered passages, `[i] title` then the snippets, for snippet-grounded prompts.
pub fn numbered_info<'a>(docs: impl IntoIterator<Item = (u32, &'a SourceDocument)>, word_budget: usize) -> String {
    let mut parts = Vec::new();
    let mut words = 0;
    for (n, d) in docs {
        let block = format!("[{n}] {}\n{}", d.title, d.snippets.join(" "));
        let w = block.split_whitespace().count();
        if !parts.is_empty() && words + w > word_budget {
            break;
        }
        words += w;
        parts.push(block);
    }
    if parts.is_empty() {
        "N/A".into()
    } else {
        parts.join("\n\n")
    }
}

/// Writes one top-level section from the references that best match its
/// headings. The prompt numbers those references 1..k; markers are mapped
/// back to store ids.
pub fn write_section(topic: &Topic, node: &OutlineNode, store: &ReferenceStore, cfg: &WritingConfig, services: &Services) -> Result<SectionDraft, PipelineError> {
    let docs = retrieve_for_section(store, node, cfg.section_k, services.embedder.as_ref())?;
    if docs.is_empty() {
        log::warn!("section `{}` has no sources; it will carry no citations", node.heading);
    }
    let info = numbered_info(docs.iter().enumerate().map(|(i, (_, d))| (i as u32 + 1, d)), usize::MAX);
    let hint = serialize_outline(&Outline::new(vec![relevel(node)]));
    let b = Bindings::new()
        .set("info", info)
        .set("topic", &topic.title)
        .set("section", &node.heading)
        .set("outline_hint", hint);
    let text = services.lm.complete(names::WRITE_SECTION, &b, ModelRole::General)?;
    let local: Vec<RefId> = docs.iter().map(|(id, _)| *id).collect();
    let resolve = |n: u32| local.get((n as usize).wrapping_sub(1)).copied();
    let mut forest = vec![skeleton(node, &[])];
    let stats = fill_forest(&mut forest, &text, &resolve);
    if stats.dropped_markers > 0 {
        log::warn!("section `{}`: dropped {} citation markers with no matching source", node.heading, stats.dropped_markers);
    }
    Ok(SectionDraft { section: forest.remove(0), stats, sources: docs.len() })
}

/// Writes every prose section of `outline`, concurrently when configured.
/// The result is in outline order whatever order the tasks ran in.
pub fn write_sections(topic: &Topic, outline: &Outline, store: &ReferenceStore, cfg: &WritingConfig, services: &Services) -> Result<Vec<SectionDraft>, PipelineError> {
    let nodes: Vec<&OutlineNode> = outline.nodes.iter().filter(|n| is_prose_section(&n.heading)).collect();
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    if cfg.section_order == SectionOrder::Reverse {
        order.reverse();
    }
    let mut slots: Vec<Option<Result<SectionDraft, PipelineError>>> = (0..nodes.len()).map(|_| None).collect();
    if cfg.parallel_sections {
        let done: Vec<(usize, Result<SectionDraft, PipelineError>)> = std::thread::scope(|s| {
            let handles: Vec<_> = order
                .iter()
                .map(|&i| {
                    let node = nodes[i];
                    (i, s.spawn(move || write_section(topic, node, store, cfg, services)))
                })
                .collect();
            handles.into_iter().map(|(i, h)| (i, h.join().expect("section task panicked"))).collect()
        });
        for (i, r) in done {
            slots[i] = Some(r);
        }
    } else {
        for &i in &order {
            slots[i] = Some(write_section(topic, nodes[i], store, cfg, services));
        }
    }
    slots.into_iter().map(|r| r.expect("every section written")).collect()
}

/// One pass removing repeated content over the whole article. The reply is
/// accepted only if it keeps the heading sequence and cites nothing a
/// section did not already cite; otherwise the input comes back unchanged.
pub fn polish_article(topic: &Topic, sections: &[ArticleSection], services: &Services) -> Result<(Vec<ArticleSection>, bool), PipelineError> {
    if sections.is_empty() {
        return Ok((Vec::new(), false));
    }
    let draft = render_sections(sections);
    let b = Bindings::new().set("topic", &topic.title).set("draft", draft);
    let reply = services.lm.complete(names::POLISH_ARTICLE, &b, ModelRole::General)?;
    let keep = || Ok((sections.to_vec(), false));
    let resolve = |n: u32| Some(RefId(n));
    let Some((polished, stats)) = refill_exact(sections, &reply, &topic.title, &resolve) else {
        log::warn!("polish changed the heading structure; keeping the unpolished article");
        return keep();
    };
    if stats.sentences == 0 {
        log::warn!("polish returned no prose; keeping the unpolished article");
        return keep();
    }
    if !citations_preserved(sections, &polished) {
        log::warn!("polish introduced citations; keeping the unpolished article");
        return keep();
    }
    Ok((polished, true))
}

fn citations_preserved(before: &[ArticleSection], after: &[ArticleSection]) -> bool {
    fn own(s: &ArticleSection) -> BTreeSet<RefId> {
        s.sentences.iter().flat_map(|x| x.citations.iter().copied()).collect()
    }
    before.iter().zip(after).all(|(b, a)| {
        own(a).is_subset(&own(b)) && b.subsections.len() == a.subsections.len() && citations_preserved(&b.subsections, &a.subsections)
    })
}

/// Sections as `#` markup, top level at `#`.
pub fn render_sections(sections: &[ArticleSection]) -> String {
    sections.iter().map(|s| s.to_markup(1)).collect::<Vec<_>>().join("\n\n")
}

fn body_tokens(sections: &[ArticleSection]) -> usize {
    words_to_tokens(sections.iter().map(ArticleSection::word_count).sum())
}

/// A summary lead of at most a tenth of the article's tokens, cut at a
/// sentence boundary and free of citation markers.
pub fn write_lead(topic: &Topic, sections: &[ArticleSection], services: &Services) -> Result<Vec<CitedSentence>, PipelineError> {
    let sentence_total: usize = sections.iter().map(ArticleSection::sentence_count).sum();
    if sentence_total == 0 {
        return Ok(Vec::new());
    }
    let cap = body_tokens(sections) / 10;
    let b = Bindings::new().set("topic", &topic.title).set("draft", render_sections(sections));
    let reply = services.lm.complete(names::WRITE_LEAD, &b, ModelRole::General)?;
    let prose: String = reply
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let lead = cap_lead(&prose, cap);
    if lead.is_empty() {
        log::warn!("lead for {} is empty or longer than {cap} tokens in its first sentence; omitted", topic.title);
    }
    Ok(lead)
}

/// Leading sentences of `prose` whose combined estimate stays within `cap`.
pub fn cap_lead(prose: &str, cap: usize) -> Vec<CitedSentence> {
    let mut out = Vec::new();
    let mut words = 0;
    for raw in split_sentences(prose) {
        let (text, _) = extract_citations(&raw);
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let w = text.split_whitespace().count();
        if words_to_tokens(words + w) > cap {
            break;
        }
        words += w;
        out.push(CitedSentence::uncited(text));
    }
    out
}

/// Puts the article together in outline order and trims it to the token
/// cap: last sentences of the longest section first, then the lead.
pub fn assemble_article(
    topic: &Topic,
    outline: &Outline,
    mut sections: Vec<ArticleSection>,
    lead: Vec<CitedSentence>,
    store: &ReferenceStore,
    cfg: &WritingConfig,
) -> (Article, usize) {
    let position = |s: &ArticleSection| outline.nodes.iter().position(|n| n.heading == s.heading()).unwrap_or(usize::MAX);
    sections.sort_by_key(position);
    let mut article = Article { topic: topic.clone(), lead, sections, references: store.clone() };
    let mut trimmed = 0;
    while article.token_estimate() > cfg.article_token_cap {
        let longest = article
            .sections
            .iter()
            .enumerate()
            .filter(|(_, s)| s.sentence_count() > 0)
            .max_by(|a, b| a.1.token_estimate().cmp(&b.1.token_estimate()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        if let Some(i) = longest {
            article.sections[i].pop_last_sentence();
        } else if article.lead.pop().is_none() && article.sections.pop().is_none() {
            break;
        }
        trimmed += 1;
    }
    (article, trimmed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenArticle {
    pub article: Article,
    /// Sections before polishing.
    pub draft: Vec<ArticleSection>,
    pub stats: WritingStats,
}

fn tally(stats: &mut WritingStats, sections: &[ArticleSection]) {
    stats.sections = sections.len();
    let all: Vec<&CitedSentence> = sections.iter().flat_map(ArticleSection::all_sentences).collect();
    stats.sentences = all.len();
    stats.uncited_sentences = all.iter().filter(|s| s.citations.is_empty()).count();
}

/// Polish, lead and assembly shared by every section-based writer.
pub fn finish_article(topic: &Topic, outline: &Outline, draft: Vec<ArticleSection>, store: &ReferenceStore, cfg: &WritingConfig, services: &Services, mut stats: WritingStats) -> Result<WrittenArticle, PipelineError> {
    let (polished, applied) = polish_article(topic, &draft, services)?;
    stats.polish_applied = applied;
    let lead = write_lead(topic, &polished, services)?;
    let (article, trimmed) = assemble_article(topic, outline, polished, lead, store, cfg);
    stats.trimmed_sentences = trimmed;
    stats.lead_sentences = article.lead.len();
    tally(&mut stats, &article.sections);
    Ok(WrittenArticle { article, draft, stats })
}

/// The full writing stage: grounded sections, then polish, lead and assembly.
pub fn write_storm_article(topic: &Topic, outline: &Outline, store: &ReferenceStore, cfg: &WritingConfig, services: &Services) -> Result<WrittenArticle, PipelineError> {
    cfg.validate()?;
    let drafts = write_sections(topic, outline, store, cfg, services)?;
    let mut stats = WritingStats::default();
    for d in &drafts {
        stats.dropped_markers += d.stats.dropped_markers;
        stats.sections_without_sources += usize::from(d.sources == 0);
    }
    let sections = drafts.into_iter().map(|d| d.section).collect();
    finish_article(topic, outline, sections, store, cfg, services, stats)
}

/// The no-outline ablation: one prompt from the conversations and collected
/// references straight to a sectioned article.
pub fn write_from_conversations(topic: &Topic, convs: &[Conversation], store: &ReferenceStore, cfg: &WritingConfig, services: &Services) -> Result<WrittenArticle, PipelineError> {
    cfg.validate()?;
    let info = numbered_info(store.iter().map(|(id, d)| (id.0, d)), cfg.article_info_word_budget);
    let b = Bindings::new()
        .set("topic", &topic.title)
        .set("conv", truncated_transcript(convs, cfg.article_info_word_budget))
        .set("info", info);
    let text = services.lm.complete(names::WRITE_ARTICLE_FROM_CONVERSATIONS, &b, ModelRole::General)?;
    let resolve = |n: u32| store.contains(RefId(n)).then_some(RefId(n));
    let (sections, _, prose) = sections_from_markup(&text, &resolve);
    let sections: Vec<ArticleSection> = sections.into_iter().filter(|s| is_prose_section(s.heading())).collect();
    let outline = outline_of(&sections);
    let stats = WritingStats { dropped_markers: prose.dropped_markers, ..WritingStats::default() };
    finish_article(topic, &outline, sections, store, cfg, services, stats)
}
