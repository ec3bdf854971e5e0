//! Automatic metrics for generated outlines and articles.
//!
//! Outline coverage is measured against a ground-truth heading set with
//! [`soft_heading_recall`] and [`heading_entity_recall`]; article text with
//! [`rouge1`], [`rouge_l`] and [`article_entity_recall`]; verifiability with
//! [`citation_scores`] over a pluggable [`EntailmentJudge`].
//! [`evaluate_run`] computes everything available for a run directory and
//! writes `metrics.json`.

mod citation;
mod entity;
mod error;
mod heading;
mod report;
mod rouge;

pub use citation::{citation_scores, CitationScores, EntailmentJudge, LmJudge, SubstringJudge};
pub use entity::{article_entity_recall, heading_entity_recall, CapitalizedSpans, EntityRecall, EntityRecognizer};
pub use error::EvalError;
pub use heading::{soft_cardinality, soft_count, soft_heading_recall, HeadingSet};
pub use report::{article_text, evaluate, evaluate_run, Evaluator, GroundTruth, MetricsReport, METRICS};
pub use rouge::{rouge1, rouge_l, rouge_tokens, RougeScore};
