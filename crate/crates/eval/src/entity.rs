//! Named-entity coverage.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::{EvalError, HeadingSet};

/// Extracts entity surface forms, lowercased.
pub trait EntityRecognizer: Send + Sync {
    fn extract(&self, text: &str) -> BTreeSet<String>;
}

const STOPWORDS: &[&str] = &[
    "a", "after", "also", "an", "and", "as", "at", "before", "but", "by", "during", "for", "from", "he", "her", "his", "however", "if",
    "in", "into", "it", "its", "of", "on", "or", "our", "she", "since", "so", "that", "the", "their", "then", "there", "these", "they",
    "this", "those", "to", "under", "until", "we", "when", "where", "which", "while", "with", "within",
];

/// Maximal runs of capitalized tokens with stopwords trimmed from both ends.
/// Punctuation before or after a token ends the run there.
#[derive(Debug, Clone, Copy, Default)]
pub struct CapitalizedSpans;

fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token.to_lowercase().as_str())
}

fn flush(run: &mut Vec<String>, out: &mut BTreeSet<String>) {
    let start = run.iter().position(|t| !is_stopword(t));
    let end = run.iter().rposition(|t| !is_stopword(t));
    if let (Some(s), Some(e)) = (start, end) {
        out.insert(run[s..=e].join(" ").to_lowercase());
    }
    run.clear();
}

impl EntityRecognizer for CapitalizedSpans {
    fn extract(&self, text: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut run: Vec<String> = Vec::new();
        for raw in text.split_whitespace() {
            let core = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if raw.starts_with(|c: char| !c.is_alphanumeric()) {
                flush(&mut run, &mut out);
            }
            if core.chars().next().is_some_and(char::is_uppercase) {
                run.push(core.to_string());
            } else {
                flush(&mut run, &mut out);
            }
            if raw.ends_with(|c: char| !c.is_alphanumeric()) {
                flush(&mut run, &mut out);
            }
        }
        flush(&mut run, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecall {
    /// 0 to 100.
    pub percent: f64,
    pub matched: usize,
    pub total: usize,
    /// The reference had no entities; `percent` is 100 by convention.
    pub vacuous: bool,
}

impl EntityRecall {
    fn of(reference: &BTreeSet<String>, generated: &BTreeSet<String>) -> Self {
        let matched = reference.intersection(generated).count();
        let total = reference.len();
        if total == 0 {
            return EntityRecall { percent: 100.0, matched, total, vacuous: true };
        }
        EntityRecall { percent: 100.0 * matched as f64 / total as f64, matched, total, vacuous: false }
    }
}

fn heading_entities(set: &HeadingSet, ner: &dyn EntityRecognizer) -> BTreeSet<String> {
    set.iter().flat_map(|h| ner.extract(h)).collect()
}

/// Share of entities found in the ground-truth headings that also appear in
/// the predicted headings.
pub fn heading_entity_recall(truth: &HeadingSet, predicted: &HeadingSet, ner: &dyn EntityRecognizer) -> Result<EntityRecall, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    Ok(EntityRecall::of(&heading_entities(truth, ner), &heading_entities(predicted, ner)))
}

/// Share of entities of `reference` that also appear in `article`.
pub fn article_entity_recall(article: &str, reference: &str, ner: &dyn EntityRecognizer) -> EntityRecall {
    EntityRecall::of(&ner.extract(reference), &ner.extract(article))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ents(text: &str) -> Vec<String> {
        CapitalizedSpans.extract(text).into_iter().collect()
    }

    #[test]
    fn spans_are_maximal_and_trimmed() {
        assert_eq!(ents("The Tokyo Olympic Games were held in Tokyo."), vec!["tokyo", "tokyo olympic games"]);
        assert_eq!(ents("After the IOC vote, Japan won."), vec!["ioc", "japan"]);
        assert_eq!(ents("In LK-99 research"), vec!["lk-99"]);
        assert_eq!(ents("no entities here"), Vec::<String>::new());
    }

    #[test]
    fn punctuation_splits_runs() {
        assert_eq!(ents("Paris, London and Rome"), vec!["london", "paris", "rome"]);
        assert_eq!(ents("(Seoul) Busan"), vec!["busan", "seoul"]);
    }

    struct Fixed;
    impl EntityRecognizer for Fixed {
        fn extract(&self, text: &str) -> BTreeSet<String> {
            text.split('+').filter(|s| !s.is_empty()).map(str::to_string).collect()
        }
    }

    #[test]
    fn heading_recall_examples() {
        let g = HeadingSet::new(["Tokyo+IOC"]);
        assert_eq!(heading_entity_recall(&g, &g, &Fixed).unwrap().percent, 100.0);
        let half = heading_entity_recall(&g, &HeadingSet::new(["Tokyo"]), &Fixed).unwrap();
        assert_eq!((half.percent, half.matched, half.total, half.vacuous), (50.0, 1, 2, false));
        let none = heading_entity_recall(&HeadingSet::new([""]), &HeadingSet::new(["Tokyo"]), &Fixed).unwrap();
        assert!(none.vacuous);
        assert_eq!(none.percent, 100.0);
        assert!(heading_entity_recall(&HeadingSet::default(), &g, &Fixed).is_err());
    }

    #[test]
    fn article_recall_examples() {
        let r = article_entity_recall("Tokyo hosted.", "Tokyo and the IOC agreed.", &CapitalizedSpans);
        assert_eq!((r.matched, r.total), (1, 2));
        assert_eq!(r.percent, 50.0);
        assert!(article_entity_recall("x", "nothing capitalized", &CapitalizedSpans).vacuous);
    }
}
