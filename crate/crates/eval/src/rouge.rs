//! Unigram and longest-common-subsequence overlap.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub r: f64,
    pub p: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_overlap(overlap: usize, candidate_len: usize, reference_len: usize) -> Self {
        let r = overlap as f64 / reference_len as f64;
        let p = overlap as f64 / candidate_len as f64;
        let f1 = if overlap == 0 { 0.0 } else { 2.0 * p * r / (p + r) };
        RougeScore { r, p, f1 }
    }
}

/// Lowercased runs of alphanumeric characters.
pub fn rouge_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase).collect()
}

fn both(candidate: &str, reference: &str) -> Result<(Vec<String>, Vec<String>), EvalError> {
    let c = rouge_tokens(candidate);
    if c.is_empty() {
        return Err(EvalError::EmptyText("candidate"));
    }
    let r = rouge_tokens(reference);
    if r.is_empty() {
        return Err(EvalError::EmptyText("reference"));
    }
    Ok((c, r))
}

/// Clipped unigram overlap: a token counts at most as often as it occurs in
/// the other text.
pub fn rouge1(candidate: &str, reference: &str) -> Result<RougeScore, EvalError> {
    let (c, r) = both(candidate, reference)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &r {
        *counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0;
    for t in &c {
        if let Some(n) = counts.get_mut(t.as_str()).filter(|n| **n > 0) {
            *n -= 1;
            overlap += 1;
        }
    }
    Ok(RougeScore::from_overlap(overlap, c.len(), r.len()))
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l(candidate: &str, reference: &str) -> Result<RougeScore, EvalError> {
    let (c, r) = both(candidate, reference)?;
    Ok(RougeScore::from_overlap(lcs_len(&c, &r), c.len(), r.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(s: RougeScore) -> (f64, f64, f64) {
        (s.r, s.p, s.f1)
    }

    #[test]
    fn rouge1_examples() {
        assert_eq!(triple(rouge1("The cat sat", "the cat  sat!").unwrap()), (1.0, 1.0, 1.0));
        let s = rouge1("the cat", "the cat sat").unwrap();
        assert_eq!((s.r, s.p), (2.0 / 3.0, 1.0));
        assert!((s.f1 - 0.8).abs() < 1e-12);
        assert_eq!(triple(rouge1("dog", "cat").unwrap()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn rouge1_clips_repeats() {
        let s = rouge1("the the the", "the cat").unwrap();
        assert_eq!((s.r, s.p), (0.5, 1.0 / 3.0));
    }

    #[test]
    fn rouge_l_examples() {
        assert_eq!(triple(rouge_l("a b c", "a b c").unwrap()), (1.0, 1.0, 1.0));
        let s = rouge_l("a b c", "a x c").unwrap();
        assert_eq!((s.r, s.p), (2.0 / 3.0, 2.0 / 3.0));
        let s = rouge_l("c b a", "a b c").unwrap();
        assert_eq!(s.r, 1.0 / 3.0);
    }

    #[test]
    fn empty_inputs_are_errors() {
        assert!(matches!(rouge1("", "a"), Err(EvalError::EmptyText("candidate"))));
        assert!(matches!(rouge_l("a", " ,. "), Err(EvalError::EmptyText("reference"))));
    }
}
