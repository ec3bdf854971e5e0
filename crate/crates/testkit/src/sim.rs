//! A rule-based stand-in for a chat model. It reads the slots back out of
//! each rendered prompt and answers from the world's facts, so its replies
//! depend only on prompt content.

use std::collections::BTreeMap;

use storm_core::{extract_citations, parse_outline, split_sentences};
use storm_lm::parse::END_PHRASE;
use storm_lm::{names, ChatBackend, ChatRequest, LmError, PromptRegistry};

use crate::slots::extract;
use crate::world::{all_facets, facet_of, keywords_in, Facet, BASIC, SPECIALIST, TOPIC};

#[derive(Default)]
pub struct SimModel {
    registry: PromptRegistry,
}

impl ChatBackend for SimModel {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        let template = self.registry.get(&request.template).ok_or_else(|| LmError::UnknownTemplate(request.template.clone()))?;
        let s = extract(template, &request.prompt);
        let slot = |k: &str| s.get(k).map(String::as_str).unwrap_or("");
        Ok(match request.template.as_str() {
            names::GEN_RELATED_TOPICS => "https://en.wikipedia.org/wiki/Rance_Tidal_Power_Station\nhttps://en.wikipedia.org/wiki/Severn_Barrage\nhttps://en.wikipedia.org/wiki/Aurora_Tidal_Barrage".into(),
            names::GEN_PERSPECTIVES => SPECIALIST
                .iter()
                .enumerate()
                .map(|(i, (who, what, _))| format!("{}. {who}: {what}", i + 1))
                .collect::<Vec<_>>()
                .join("\n"),
            names::GEN_QUESTION => next_question(slot("persona"), slot("conv")),
            names::GEN_QUESTION_NO_PERSPECTIVE => next_question("", slot("conv")),
            names::GEN_QUESTIONS_BATCH => batch(slot("perspectives"), slot("count").trim().parse().unwrap_or(0)),
            names::GEN_QUERIES => queries(slot("question")),
            names::GEN_ANSWER => answer(slot("info")),
            names::DIRECT_GEN_OUTLINE => {
                let mut out = format!("# {TOPIC}\n");
                for f in BASIC {
                    out.push_str(&format!("## {}\n", f.heading));
                }
                out
            }
            names::REFINE_OUTLINE => outline_from(&format!("{}\n{}", slot("old_outline"), slot("conv")), true),
            names::RAG_OUTLINE => outline_from(slot("info"), false),
            names::RAG_EXPAND_OUTLINE => outline_from(&format!("{}\n{}", slot("old_outline"), slot("info")), false),
            names::WRITE_SECTION => write_section(slot("section"), slot("outline_hint"), slot("info")),
            names::RAG_ARTICLE => write_article(slot("outline"), slot("info")),
            names::WRITE_ARTICLE_FROM_CONVERSATIONS => {
                let outline = outline_from(&format!("{}\n{}", slot("conv"), slot("info")), false);
                write_article(&outline, slot("info"))
            }
            names::DIRECT_GEN_ARTICLE => parse_outline(slot("outline"))
                .outline
                .preorder()
                .into_iter()
                .map(|n| format!("{} {}\nThe {} of the {TOPIC} is described in many sources.", "#".repeat(n.level), n.heading, n.heading.to_lowercase()))
                .collect::<Vec<_>>()
                .join("\n"),
            names::POLISH_ARTICLE => polish(slot("draft")),
            names::WRITE_LEAD => lead(slot("draft")),
            names::JUDGE_ENTAILMENT => judge(slot("passage"), slot("claim")).into(),
            other => return Err(LmError::UnknownTemplate(other.into())),
        })
    }
}

fn capitalise(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn ask(keyword: &str, round: usize) -> String {
    let is_facet = all_facets().any(|f| f.keyword == keyword);
    match (is_facet, round) {
        (true, 0) => format!("What can you tell me about the {keyword} of the {TOPIC}?"),
        (true, 1) => format!("What else is known about the {keyword} of the {TOPIC}?"),
        (true, _) => format!("Why does the {keyword} matter for the {TOPIC}?"),
        (false, _) => format!("How did the {keyword} affect the {TOPIC}?"),
    }
}

/// Follows up on the newest answer first, then works through the persona's
/// own facets; with nothing left, thanks the expert.
fn next_question(persona: &str, conv: &str) -> String {
    let mut questions = Vec::new();
    let mut answers = Vec::new();
    for line in conv.lines() {
        if let Some(q) = line.strip_prefix("Wikipedia Writer: ") {
            questions.push(q);
        } else if let Some(a) = line.strip_prefix("Expert: ") {
            answers.push(a);
        }
    }
    let asked: Vec<&str> = questions.iter().flat_map(|q| keywords_in(q)).collect();
    let mut own: Vec<&str> = keywords_in(persona).into_iter().filter(|k| all_facets().any(|f| f.keyword == *k)).collect();
    if own.is_empty() {
        own = BASIC.iter().map(|f| f.keyword).collect();
    }
    let follow_ups = answers.iter().rev().flat_map(|a| keywords_in(a));
    match follow_ups.chain(own).find(|k| !asked.contains(k)) {
        Some(k) => format!("{}\nI would also like to hear more after that.", ask(k, 0)),
        None => END_PHRASE.into(),
    }
}

fn batch(perspectives: &str, count: usize) -> String {
    let mut facets: Vec<&str> = Vec::new();
    for line in perspectives.lines() {
        let mut found: Vec<&str> = keywords_in(line);
        if found.is_empty() {
            found = BASIC.iter().map(|f| f.keyword).collect();
        }
        for k in found {
            if !facets.contains(&k) {
                facets.push(k);
            }
        }
    }
    if facets.is_empty() {
        return String::new();
    }
    (0..count).map(|i| format!("- {}", ask(facets[i % facets.len()], i / facets.len()))).collect::<Vec<_>>().join("\n")
}

fn queries(question: &str) -> String {
    match keywords_in(question).first() {
        Some(k) => format!("- {TOPIC} {k}\n- {k}"),
        None => format!("- {}", question.trim()),
    }
}

fn answer(info: &str) -> String {
    let snippets: Vec<&str> = info.split("\n\n").map(str::trim).filter(|s| !s.is_empty() && *s != "N/A").collect();
    if snippets.is_empty() {
        return "I could not find anything reliable on that.".into();
    }
    snippets.join(" ")
}

/// Headings for every facet mentioned in `text`, subtopics nested under
/// their facet. Basic facets come first in world order.
fn outline_from(text: &str, see_also: bool) -> String {
    let found = keywords_in(text);
    let headings_line: Vec<String> = text.lines().filter(|l| l.starts_with('#')).map(|l| l.trim_start_matches('#').trim().to_lowercase()).collect();
    let mut out = String::new();
    for f in all_facets() {
        let named = headings_line.contains(&f.heading.to_lowercase());
        let subs: Vec<(&str, bool)> = f.subtopics.iter().filter(|(a, _)| found.contains(a)).map(|(a, b)| (*a, found.contains(b))).collect();
        if !(named || found.contains(&f.keyword) || !subs.is_empty()) {
            continue;
        }
        out.push_str(&format!("# {}\n", f.heading));
        for (a, has_b) in &subs {
            out.push_str(&format!("## {}\n", capitalise(a)));
            if *has_b {
                if let Some((_, b)) = f.subtopics.iter().find(|(x, _)| x == a) {
                    out.push_str(&format!("### {}\n", capitalise(b)));
                }
            }
        }
    }
    if out.is_empty() {
        out.push_str("# Overview\n");
    }
    if see_also {
        out.push_str("# See also\n");
    }
    out
}

struct Block {
    n: u32,
    text: String,
    keywords: Vec<&'static str>,
}

fn blocks(info: &str) -> Vec<Block> {
    info.split("\n\n")
        .filter_map(|b| {
            let (head, body) = b.trim().split_once('\n')?;
            let n = head.strip_prefix('[')?.split_once(']')?.0.parse().ok()?;
            Some(Block { n, text: body.to_string(), keywords: keywords_in(body) })
        })
        .collect()
}

fn cite(sentence: &str, n: u32) -> String {
    format!("{}[{n}].", sentence.trim().trim_end_matches('.'))
}

fn lead_sentence(text: &str) -> String {
    split_sentences(text).into_iter().next().unwrap_or_default()
}

/// Keywords that place a block under a heading: the facet keyword for a
/// facet heading, a subtopic and its deeper subtopic for a subtopic heading.
fn heading_keys(heading: &str) -> (Option<&'static Facet>, Vec<&'static str>) {
    let h = heading.to_lowercase();
    for f in all_facets() {
        if f.heading.to_lowercase() == h {
            return (Some(f), vec![f.keyword]);
        }
        for (a, b) in f.subtopics {
            if a.to_lowercase() == h {
                return (Some(f), vec![a, b]);
            }
            if b.to_lowercase() == h {
                return (Some(f), vec![b]);
            }
        }
    }
    (None, Vec::new())
}

/// Prose for a heading tree: each block goes to the first heading whose
/// keys it mentions; generic blocks (no keywords) to the first heading.
fn fill(headings: &[(usize, String)], blocks: &[Block], generic_limit: usize) -> String {
    let mut bodies: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let keys: Vec<(Option<&Facet>, Vec<&str>)> = headings.iter().map(|(_, h)| heading_keys(h)).collect();
    let mut generic = 0;
    let mut specific = std::collections::BTreeSet::new();
    for b in blocks {
        let target = if b.keywords.is_empty() {
            generic += 1;
            (generic <= generic_limit).then_some(0)
        } else {
            let primary = b.keywords[0];
            keys.iter().rposition(|(_, ks)| ks.contains(&primary)).or_else(|| {
                keys.iter().position(|(f, _)| f.is_some_and(|f| b.keywords.iter().any(|k| facet_of(k).is_some_and(|g| std::ptr::eq(g, f)))))
            })
        };
        if let Some(t) = target {
            if !b.keywords.is_empty() {
                specific.insert(t);
            }
            bodies.entry(t).or_default().push(cite(&lead_sentence(&b.text), b.n));
        }
    }
    let mut out = String::new();
    for (i, (level, h)) in headings.iter().enumerate() {
        out.push_str(&format!("{} {h}\n", "#".repeat(*level)));
        if !specific.contains(&i) {
            out.push_str(&format!("Little has been published about the {} of the {TOPIC}. ", h.to_lowercase()));
        }
        if let Some(v) = bodies.get(&i) {
            out.push_str(&v.join(" "));
        }
        out.push_str("\n\n");
    }
    out.trim_end().to_string()
}

fn write_section(section: &str, hint: &str, info: &str) -> String {
    let mut headings: Vec<(usize, String)> = parse_outline(hint).outline.preorder().into_iter().map(|n| (n.level, n.heading.clone())).collect();
    if headings.is_empty() {
        headings.push((1, section.to_string()));
    }
    fill(&headings, &blocks(info), 2)
}

fn write_article(outline: &str, info: &str) -> String {
    let headings: Vec<(usize, String)> = parse_outline(outline).outline.preorder().into_iter().map(|n| (n.level, n.heading.clone())).collect();
    if headings.is_empty() {
        return String::new();
    }
    fill(&headings, &blocks(info), 3)
}

/// Drops every sentence whose text already appeared, keeping structure.
fn polish(draft: &str) -> String {
    let mut seen: Vec<String> = Vec::new();
    let mut out = Vec::new();
    for line in draft.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            out.push(line.to_string());
            continue;
        }
        let mut kept = Vec::new();
        for s in split_sentences(line) {
            let (text, _) = extract_citations(&s);
            let key = text.trim().to_lowercase();
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            kept.push(s);
        }
        out.push(kept.join(" "));
    }
    out.join("\n")
}

fn lead(draft: &str) -> String {
    let firsts: Vec<String> = draft
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .take(3)
        .map(|l| extract_citations(&lead_sentence(l)).0.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let mut out = format!("The {TOPIC} is a tidal power scheme on the Aurora estuary.");
    for s in firsts {
        out.push(' ');
        out.push_str(&s);
    }
    out
}

fn content_words(text: &str) -> Vec<String> {
    storm_retrieval::word_tokens(text).into_iter().filter(|w| w.len() > 3).collect()
}

fn judge(passage: &str, claim: &str) -> &'static str {
    let (claim, _) = extract_citations(claim);
    let words = content_words(&claim);
    if words.is_empty() {
        return "no";
    }
    let passage: Vec<String> = content_words(passage);
    let hit = words.iter().filter(|w| passage.contains(w)).count();
    if hit * 5 >= words.len() * 4 {
        "yes"
    } else {
        "no"
    }
}
