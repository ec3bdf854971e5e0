//! Full-length articles: sections of cited sentences plus a lead.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::citation::render_cited;
use crate::reference::{RefId, ReferenceStore};
use crate::tokens::words_to_tokens;
use crate::topic::Topic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitedSentence {
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub citations: Vec<RefId>,
}

impl CitedSentence {
    pub fn new(text: impl Into<String>, citations: Vec<RefId>) -> Self {
        CitedSentence { text: text.into(), citations }
    }

    pub fn uncited(text: impl Into<String>) -> Self {
        Self::new(text, Vec::new())
    }

    pub fn render(&self) -> String {
        let ids: Vec<u32> = self.citations.iter().map(|r| r.0).collect();
        render_cited(&self.text, &ids)
    }

    fn words(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleSection {
    /// Headings from the top-level section down to this one.
    pub heading_path: Vec<String>,
    pub sentences: Vec<CitedSentence>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subsections: Vec<ArticleSection>,
}

impl ArticleSection {
    pub fn new(heading_path: Vec<String>) -> Self {
        ArticleSection { heading_path, sentences: Vec::new(), subsections: Vec::new() }
    }

    pub fn heading(&self) -> &str {
        self.heading_path.last().map(String::as_str).unwrap_or("")
    }

    pub fn depth(&self) -> usize {
        self.heading_path.len()
    }

    /// Sentences of this section and all subsections, document order.
    pub fn all_sentences(&self) -> Vec<&CitedSentence> {
        let mut out: Vec<&CitedSentence> = self.sentences.iter().collect();
        for s in &self.subsections {
            out.extend(s.all_sentences());
        }
        out
    }

    pub fn headings(&self) -> Vec<&str> {
        let mut out = vec![self.heading()];
        for s in &self.subsections {
            out.extend(s.headings());
        }
        out
    }

    pub fn word_count(&self) -> usize {
        let own: usize = self.heading().split_whitespace().count() + self.sentences.iter().map(|s| s.words()).sum::<usize>();
        own + self.subsections.iter().map(ArticleSection::word_count).sum::<usize>()
    }

    pub fn token_estimate(&self) -> usize {
        words_to_tokens(self.word_count())
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len() + self.subsections.iter().map(ArticleSection::sentence_count).sum::<usize>()
    }

    /// Removes the last sentence in document order. Returns false when empty.
    pub fn pop_last_sentence(&mut self) -> bool {
        for sub in self.subsections.iter_mut().rev() {
            if sub.pop_last_sentence() {
                return true;
            }
        }
        self.sentences.pop().is_some()
    }

    pub fn cited_ids(&self) -> BTreeSet<RefId> {
        self.all_sentences().into_iter().flat_map(|s| s.citations.iter().copied()).collect()
    }

    fn render_into(&self, out: &mut String, base_level: usize) {
        out.push_str(&"#".repeat(base_level + self.depth() - 1));
        out.push(' ');
        out.push_str(self.heading());
        out.push_str("\n\n");
        if !self.sentences.is_empty() {
            let body: Vec<String> = self.sentences.iter().map(CitedSentence::render).collect();
            out.push_str(&body.join(" "));
            out.push_str("\n\n");
        }
        for s in &self.subsections {
            s.render_into(out, base_level);
        }
    }

    /// The section in `#` markup, its own heading at `base_level`.
    pub fn to_markup(&self, base_level: usize) -> String {
        let mut out = String::new();
        self.render_into(&mut out, base_level);
        out.trim_end().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub topic: Topic,
    pub lead: Vec<CitedSentence>,
    pub sections: Vec<ArticleSection>,
    pub references: ReferenceStore,
}

impl Article {
    pub fn word_count(&self) -> usize {
        self.lead.iter().map(|s| s.words()).sum::<usize>() + self.sections.iter().map(ArticleSection::word_count).sum::<usize>()
    }

    /// Token estimate of the lead plus every section (headings included).
    pub fn token_estimate(&self) -> usize {
        words_to_tokens(self.word_count())
    }

    /// Non-lead sentences in document order.
    pub fn body_sentences(&self) -> Vec<&CitedSentence> {
        self.sections.iter().flat_map(ArticleSection::all_sentences).collect()
    }

    pub fn cited_ids(&self) -> BTreeSet<RefId> {
        self.sections.iter().flat_map(ArticleSection::cited_ids).collect()
    }

    pub fn uncited_sentence_count(&self) -> usize {
        self.body_sentences().iter().filter(|s| s.citations.is_empty()).count()
    }

    /// Every citation id of every body sentence resolves in `references`.
    pub fn citations_resolve(&self) -> bool {
        self.cited_ids().iter().all(|id| self.references.contains(*id))
    }

    /// `n. title <url>` lines for every cited reference, in id order.
    pub fn references_block(&self) -> Vec<String> {
        self.cited_ids()
            .into_iter()
            .filter_map(|id| self.references.get(id).map(|d| format!("{id}. {} <{}>", d.title, d.url)))
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# {}\n\n", self.topic.title);
        if !self.lead.is_empty() {
            let lead: Vec<&str> = self.lead.iter().map(|s| s.text.as_str()).collect();
            out.push_str(&lead.join(" "));
            out.push_str("\n\n");
        }
        for s in &self.sections {
            s.render_into(&mut out, 2);
        }
        let refs = self.references_block();
        if !refs.is_empty() {
            out.push_str("## References\n\n");
            for line in refs {
                out.push_str(&line);
                out.push('\n');
            }
        }
        let mut out = out.trim_end().to_string();
        out.push('\n');
        out
    }
}

/// A heading and the text up to the next heading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkupBlock {
    pub level: usize,
    pub heading: String,
    pub body: String,
}

/// Splits `#`-markup text into the preamble before the first heading and
/// one block per heading.
pub fn split_by_headings(text: &str) -> (String, Vec<MarkupBlock>) {
    let mut preamble = String::new();
    let mut blocks: Vec<MarkupBlock> = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        let hashes = t.chars().take_while(|&c| c == '#').count();
        let heading = t[hashes..].trim();
        if hashes > 0 && !heading.is_empty() {
            blocks.push(MarkupBlock { level: hashes, heading: heading.to_string(), body: String::new() });
            continue;
        }
        let target = match blocks.last_mut() {
            Some(b) => &mut b.body,
            None => &mut preamble,
        };
        target.push_str(line);
        target.push('\n');
    }
    for b in &mut blocks {
        b.body = b.body.trim().to_string();
    }
    (preamble.trim().to_string(), blocks)
}
