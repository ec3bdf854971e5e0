//! Sentence-level citation recall and precision.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use storm_core::{Article, CitedSentence, ReferenceStore};
use storm_lm::{names, parse::parse_verdict, Bindings, LmGateway, ModelRole};

use crate::EvalError;

/// Decides, for each passage separately, whether it supports the claim.
pub trait EntailmentJudge: Send + Sync {
    fn supports(&self, passages: &[String], claim: &str) -> Result<Vec<bool>, EvalError>;
}

fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Supported means the claim occurs verbatim in the passage, ignoring case
/// and whitespace differences.
#[derive(Debug, Clone, Copy, Default)]
pub struct SubstringJudge;

impl EntailmentJudge for SubstringJudge {
    fn supports(&self, passages: &[String], claim: &str) -> Result<Vec<bool>, EvalError> {
        let claim = normalize(claim);
        Ok(passages.iter().map(|p| !claim.is_empty() && normalize(p).contains(&claim)).collect())
    }
}

/// One `judge_entailment` completion per passage.
pub struct LmJudge {
    lm: Arc<LmGateway>,
    role: ModelRole,
}

impl LmJudge {
    pub fn new(lm: Arc<LmGateway>) -> Self {
        LmJudge { lm, role: ModelRole::General }
    }

    pub fn with_role(mut self, role: ModelRole) -> Self {
        self.role = role;
        self
    }
}

impl EntailmentJudge for LmJudge {
    fn supports(&self, passages: &[String], claim: &str) -> Result<Vec<bool>, EvalError> {
        passages
            .iter()
            .map(|p| {
                let b = Bindings::new().set("passage", p).set("claim", claim);
                let reply = self.lm.complete(names::JUDGE_ENTAILMENT, &b, self.role).map_err(|e| EvalError::Judge(e.to_string()))?;
                parse_verdict(&reply).ok_or_else(|| EvalError::Judge(format!("no verdict in reply {:?}", reply.trim())))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationScores {
    /// Percentage of body sentences supported by all their citations
    /// together. `None` for an article without body sentences.
    pub recall: Option<f64>,
    /// Percentage of (sentence, citation) pairs where the one cited document
    /// supports the sentence. `None` when nothing is cited.
    pub precision: Option<f64>,
    pub sentences: usize,
    pub supported_sentences: usize,
    pub pairs: usize,
    pub supported_pairs: usize,
    pub uncited_sentence_count: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    supported: bool,
    pairs: usize,
    supported_pairs: usize,
}

fn judge_sentence(s: &CitedSentence, store: &ReferenceStore, judge: &dyn EntailmentJudge) -> Result<Tally, EvalError> {
    let passages: Vec<Option<String>> = s.citations.iter().map(|id| store.get(*id).map(|d| d.passage())).collect();
    let resolved: Vec<String> = passages.iter().flatten().cloned().collect();
    let mut tally = Tally { pairs: s.citations.len(), ..Tally::default() };
    if resolved.is_empty() {
        return Ok(tally);
    }
    let mut asked = resolved.clone();
    if resolved.len() > 1 {
        asked.push(resolved.join("\n\n"));
    }
    let verdicts = judge.supports(&asked, &s.text)?;
    if verdicts.len() != asked.len() {
        return Err(EvalError::Judge(format!("{} verdicts for {} passages", verdicts.len(), asked.len())));
    }
    tally.supported_pairs = verdicts[..resolved.len()].iter().filter(|v| **v).count();
    tally.supported = *verdicts.last().expect("at least one verdict");
    Ok(tally)
}

fn percent(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| 100.0 * n as f64 / d as f64)
}

const WORKERS: usize = 8;

/// Scores the body sentences of `article` against the snippets of the
/// documents they cite in `store`. Uncited sentences count against recall
/// and are outside precision's denominator; a citation that does not
/// resolve is an unsupported pair.
pub fn citation_scores(article: &Article, store: &ReferenceStore, judge: &dyn EntailmentJudge) -> Result<CitationScores, EvalError> {
    let sentences = article.body_sentences();
    let chunk = sentences.len().div_ceil(WORKERS).max(1);
    let tallies: Vec<Result<Vec<Tally>, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = sentences
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|s| judge_sentence(s, store, judge)).collect::<Result<Vec<_>, _>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("judge worker panicked")).collect()
    });
    let mut all = Vec::with_capacity(sentences.len());
    for t in tallies {
        all.extend(t?);
    }
    let supported_sentences = all.iter().filter(|t| t.supported).count();
    let pairs = all.iter().map(|t| t.pairs).sum();
    let supported_pairs = all.iter().map(|t| t.supported_pairs).sum();
    Ok(CitationScores {
        recall: percent(supported_sentences, all.len()),
        precision: percent(supported_pairs, pairs),
        sentences: all.len(),
        supported_sentences,
        pairs,
        supported_pairs,
        uncited_sentence_count: sentences.iter().filter(|s| s.citations.is_empty()).count(),
    })
}
