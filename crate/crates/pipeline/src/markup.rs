//! Mapping model prose back onto section trees.

use storm_core::article::split_by_headings;
use storm_core::{extract_citations, split_sentences, ArticleSection, CitedSentence, Outline, OutlineNode, RefId};

/// Empty section tree with the shape of `node`.
pub fn skeleton(node: &OutlineNode, parent: &[String]) -> ArticleSection {
    let mut path = parent.to_vec();
    path.push(node.heading.clone());
    let mut s = ArticleSection::new(path.clone());
    s.subsections = node.children.iter().map(|c| skeleton(c, &path)).collect();
    s
}

pub fn skeleton_forest(outline: &Outline) -> Vec<ArticleSection> {
    outline.nodes.iter().map(|n| skeleton(n, &[])).collect()
}

/// Same tree with every sentence removed.
pub fn empty_like(section: &ArticleSection) -> ArticleSection {
    ArticleSection {
        heading_path: section.heading_path.clone(),
        sentences: Vec::new(),
        subsections: section.subsections.iter().map(empty_like).collect(),
    }
}

pub fn heading_key(h: &str) -> String {
    h.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

/// Index paths of every section in preorder.
fn slots(forest: &[ArticleSection]) -> Vec<Vec<usize>> {
    fn walk(s: &ArticleSection, path: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        for (i, c) in s.subsections.iter().enumerate() {
            let mut p = path.clone();
            p.push(i);
            walk(c, p, out);
        }
    }
    let mut out = Vec::new();
    for (i, s) in forest.iter().enumerate() {
        walk(s, vec![i], &mut out);
    }
    out
}

fn at<'a>(forest: &'a mut [ArticleSection], path: &[usize]) -> &'a mut ArticleSection {
    let mut s = &mut forest[path[0]];
    for &i in &path[1..] {
        s = &mut s.subsections[i];
    }
    s
}

fn heading_at<'a>(forest: &'a [ArticleSection], path: &[usize]) -> &'a str {
    let mut s = &forest[path[0]];
    for &i in &path[1..] {
        s = &s.subsections[i];
    }
    s.heading()
}

/// Counters from turning prose into cited sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProseStats {
    pub sentences: usize,
    pub dropped_markers: usize,
}

/// Sentences of `body` with markers resolved through `resolve`; markers it
/// rejects are dropped and counted.
pub fn cited_sentences(body: &str, resolve: &dyn Fn(u32) -> Option<RefId>, stats: &mut ProseStats) -> Vec<CitedSentence> {
    let mut out = Vec::new();
    for raw in split_sentences(body) {
        let (text, markers) = extract_citations(&raw);
        let text = text.trim();
        if text.is_empty() || !text.chars().any(char::is_alphanumeric) {
            stats.dropped_markers += markers.len();
            continue;
        }
        let mut ids: Vec<RefId> = Vec::new();
        for m in markers {
            match resolve(m) {
                Some(id) if !ids.contains(&id) => ids.push(id),
                Some(_) => {}
                None => stats.dropped_markers += 1,
            }
        }
        stats.sentences += 1;
        out.push(CitedSentence::new(text, ids));
    }
    out
}

/// Pours `text` into an existing heading skeleton. Each heading block is
/// matched to the next skeleton section with the same heading; a block whose
/// heading does not match stays with the section before it, and text before
/// the first heading goes to the first section.
pub fn fill_forest(forest: &mut [ArticleSection], text: &str, resolve: &dyn Fn(u32) -> Option<RefId>) -> ProseStats {
    let mut stats = ProseStats::default();
    if forest.is_empty() {
        return stats;
    }
    let slots = slots(forest);
    let keys: Vec<String> = slots.iter().map(|p| heading_key(heading_at(forest, p))).collect();
    let (preamble, blocks) = split_by_headings(text);
    let mut cursor = 0usize;
    let first = cited_sentences(&preamble, resolve, &mut stats);
    at(forest, &slots[0]).sentences.extend(first);
    for b in blocks {
        let key = heading_key(&b.heading);
        if let Some(off) = keys[cursor..].iter().position(|k| *k == key) {
            cursor += off;
        }
        let sentences = cited_sentences(&b.body, resolve, &mut stats);
        at(forest, &slots[cursor]).sentences.extend(sentences);
    }
    stats
}

/// Strict variant for edits of existing text: the heading sequence of
/// `text` must equal the skeleton's exactly (ignoring levels and a leading
/// title heading), otherwise `None`.
pub fn refill_exact(forest: &[ArticleSection], text: &str, title: &str, resolve: &dyn Fn(u32) -> Option<RefId>) -> Option<(Vec<ArticleSection>, ProseStats)> {
    let slots = slots(forest);
    let (_, mut blocks) = split_by_headings(text);
    if blocks.len() == slots.len() + 1 && heading_key(&blocks[0].heading) == heading_key(title) && blocks[0].body.trim().is_empty() {
        blocks.remove(0);
    }
    if blocks.len() != slots.len() {
        return None;
    }
    let mut out: Vec<ArticleSection> = forest.iter().map(empty_like).collect();
    let mut stats = ProseStats::default();
    for (b, path) in blocks.iter().zip(&slots) {
        if heading_key(&b.heading) != heading_key(heading_at(forest, path)) {
            return None;
        }
        let sentences = cited_sentences(&b.body, resolve, &mut stats);
        at(&mut out, path).sentences = sentences;
    }
    Some((out, stats))
}

/// Builds a section tree from free-form `#` markup, the shallowest heading
/// level becoming top level. Text before the first heading is returned
/// separately.
pub fn sections_from_markup(text: &str, resolve: &dyn Fn(u32) -> Option<RefId>) -> (Vec<ArticleSection>, String, ProseStats) {
    let (preamble, blocks) = split_by_headings(text);
    let mut stats = ProseStats::default();
    let min = blocks.iter().map(|b| b.level).min().unwrap_or(1);
    let mut forest: Vec<ArticleSection> = Vec::new();
    // Index path of the open section at each depth.
    let mut open: Vec<usize> = Vec::new();
    for b in blocks {
        let depth = (b.level - min + 1).min(open.len() + 1);
        open.truncate(depth - 1);
        let sentences = cited_sentences(&b.body, resolve, &mut stats);
        if open.is_empty() {
            let mut s = ArticleSection::new(vec![b.heading.clone()]);
            s.sentences = sentences;
            forest.push(s);
            open.push(forest.len() - 1);
        } else {
            let parent = at(&mut forest, &open);
            let mut path = parent.heading_path.clone();
            path.push(b.heading.clone());
            let mut s = ArticleSection::new(path);
            s.sentences = sentences;
            parent.subsections.push(s);
            let idx = parent.subsections.len() - 1;
            open.push(idx);
        }
    }
    (forest, preamble, stats)
}

/// Outline with the shape of a section tree.
pub fn outline_of(sections: &[ArticleSection]) -> Outline {
    fn node(s: &ArticleSection) -> OutlineNode {
        OutlineNode::new(s.heading(), s.depth()).with_children(s.subsections.iter().map(node).collect())
    }
    Outline::new(sections.iter().map(node).collect())
}

/// `node` and its subtree re-levelled so `node` is at level 1.
pub fn relevel(node: &OutlineNode) -> OutlineNode {
    fn go(n: &OutlineNode, level: usize) -> OutlineNode {
        OutlineNode::new(n.heading.clone(), level).with_children(n.children.iter().map(|c| go(c, level + 1)).collect())
    }
    go(node, 1)
}
