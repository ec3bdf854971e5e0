//! Brute-force reference implementations of the metrics, written straight
//! from their definitions and sharing no code with the evaluation crate.

use std::collections::BTreeMap;

use storm_core::{Article, ReferenceStore};
use storm_retrieval::EmbeddingProvider;

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for k in 0..a.len() {
        dot += a[k] * b[k];
        na += a[k] * a[k];
        nb += b[k] * b[k];
    }
    dot / (na.sqrt() * nb.sqrt())
}

fn sim(x: &str, y: &str, e: &dyn EmbeddingProvider) -> f64 {
    cos(&e.embed(x).expect("stub embeds"), &e.embed(y).expect("stub embeds"))
}

pub fn soft_count(set: &[String], i: usize, e: &dyn EmbeddingProvider) -> f64 {
    let mut total = 0.0;
    for j in 0..set.len() {
        total += sim(&set[i], &set[j], e);
    }
    1.0 / total
}

pub fn card(set: &[String], e: &dyn EmbeddingProvider) -> f64 {
    (0..set.len()).map(|i| soft_count(set, i, e)).sum()
}

pub fn soft_heading_recall(g: &[String], p: &[String], e: &dyn EmbeddingProvider) -> f64 {
    let union: Vec<String> = g.iter().chain(p).cloned().collect();
    let inter = card(g, e) + card(p, e) - card(&union, e);
    inter / card(g, e)
}

fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// (recall, precision, f1) from an overlap count.
fn triple(overlap: usize, cand: usize, reference: usize) -> (f64, f64, f64) {
    let r = overlap as f64 / reference as f64;
    let p = overlap as f64 / cand as f64;
    let f = if r + p == 0.0 { 0.0 } else { 2.0 * r * p / (r + p) };
    (r, p, f)
}

pub fn rouge1(candidate: &str, reference: &str) -> (f64, f64, f64) {
    let c = tokens(candidate);
    let r = tokens(reference);
    let mut cc: BTreeMap<&str, usize> = BTreeMap::new();
    let mut rc: BTreeMap<&str, usize> = BTreeMap::new();
    c.iter().for_each(|t| *cc.entry(t).or_default() += 1);
    r.iter().for_each(|t| *rc.entry(t).or_default() += 1);
    let overlap = cc.iter().map(|(t, n)| (*n).min(rc.get(t).copied().unwrap_or(0))).sum();
    triple(overlap, c.len(), r.len())
}

/// Longest common subsequence by trying every subsequence of the shorter
/// side, so only for inputs of at most about 16 tokens.
fn lcs_exhaustive(a: &[String], b: &[String]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 16, "exhaustive lcs is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let picked: Vec<&String> = (0..short.len()).filter(|i| mask & (1 << i) != 0).map(|i| &short[i]).collect();
        if picked.len() <= best {
            continue;
        }
        let mut it = long.iter();
        if picked.iter().all(|t| it.any(|x| x == *t)) {
            best = picked.len();
        }
    }
    best
}

pub fn rouge_l(candidate: &str, reference: &str) -> (f64, f64, f64) {
    let c = tokens(candidate);
    let r = tokens(reference);
    triple(lcs_exhaustive(&c, &r), c.len(), r.len())
}

fn contains_verbatim(passage: &str, claim: &str) -> bool {
    let squash = |s: &str| s.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ");
    let claim = squash(claim);
    !claim.is_empty() && squash(passage).contains(&claim)
}

/// Citation (recall, precision) in percent under verbatim-substring
/// support, enumerating every (sentence, citation) pair of the body.
pub fn citation_scores(article: &Article, store: &ReferenceStore) -> (Option<f64>, Option<f64>) {
    let mut sentences = 0usize;
    let mut supported = 0usize;
    let mut pairs = 0usize;
    let mut good_pairs = 0usize;
    let mut stack: Vec<&storm_core::ArticleSection> = article.sections.iter().rev().collect();
    while let Some(sec) = stack.pop() {
        for s in &sec.sentences {
            sentences += 1;
            let mut joined: Vec<String> = Vec::new();
            for id in &s.citations {
                pairs += 1;
                if let Some(doc) = store.get(*id) {
                    let passage = doc.snippets.join("\n");
                    if contains_verbatim(&passage, &s.text) {
                        good_pairs += 1;
                    }
                    joined.push(passage);
                }
            }
            if !joined.is_empty() && contains_verbatim(&joined.join("\n\n"), &s.text) {
                supported += 1;
            }
        }
        stack.extend(sec.subsections.iter().rev());
    }
    let pct = |n: usize, d: usize| (d > 0).then(|| n as f64 * 100.0 / d as f64);
    (pct(supported, sentences), pct(good_pairs, pairs))
}
