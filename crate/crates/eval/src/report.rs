//! The metric suite over a run directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use storm_core::{Article, Outline, RunDir, Stage};
use storm_pipeline::run::{load_outline, ARTICLE_JSON, OUTLINE};
use storm_retrieval::EmbeddingProvider;

use crate::{
    article_entity_recall, citation_scores, heading_entity_recall, rouge1, rouge_l, soft_heading_recall, EntailmentJudge, EntityRecognizer, EvalError,
    HeadingSet, RougeScore,
};

pub const METRICS: &str = "metrics.json";

/// Human-written reference article for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub title: String,
    pub headings: HeadingSet,
    pub text: String,
}

pub struct Evaluator<'a> {
    pub embedder: &'a dyn EmbeddingProvider,
    pub ner: &'a dyn EntityRecognizer,
    pub judge: Option<&'a dyn EntailmentJudge>,
}

/// Every metric is `None` when it could not be computed; `unavailable`
/// then says why.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub soft_heading_recall: Option<f64>,
    pub heading_entity_recall: Option<f64>,
    pub rouge1: Option<RougeScore>,
    #[serde(rename = "rougeL")]
    pub rouge_l: Option<RougeScore>,
    pub article_entity_recall: Option<f64>,
    pub citation_recall: Option<f64>,
    pub citation_precision: Option<f64>,
    pub uncited_sentence_count: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub unavailable: BTreeMap<String, String>,
    /// Entity recalls that are 100 only because the reference had no entities.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vacuous: Vec<String>,
}

impl MetricsReport {
    fn missing(&mut self, fields: &[&str], reason: &str) {
        for f in fields {
            self.unavailable.insert(f.to_string(), reason.to_string());
        }
    }

    /// Two-column text table, percentages where the metric is one.
    pub fn to_table(&self) -> String {
        let pct = |v: Option<f64>| v.map(|x| format!("{x:.2}%"));
        let frac = |v: Option<f64>| v.map(|x| format!("{:.2}%", 100.0 * x));
        let rouge = |v: Option<RougeScore>| v.map(|s| format!("r {:.2}% p {:.2}% f1 {:.2}%", 100.0 * s.r, 100.0 * s.p, 100.0 * s.f1));
        let rows = [
            ("soft_heading_recall", frac(self.soft_heading_recall)),
            ("heading_entity_recall", pct(self.heading_entity_recall)),
            ("rouge1", rouge(self.rouge1)),
            ("rougeL", rouge(self.rouge_l)),
            ("article_entity_recall", pct(self.article_entity_recall)),
            ("citation_recall", pct(self.citation_recall)),
            ("citation_precision", pct(self.citation_precision)),
            ("uncited_sentence_count", self.uncited_sentence_count.map(|n| n.to_string())),
        ];
        let mut out = String::new();
        for (name, value) in rows {
            let shown = value.unwrap_or_else(|| format!("n/a ({})", self.unavailable.get(name).map(String::as_str).unwrap_or("not computed")));
            let flag = if self.vacuous.iter().any(|v| v == name) { " (vacuous)" } else { "" };
            let _ = writeln!(out, "{name:<24}{shown}{flag}");
        }
        out
    }
}

/// Lead and body sentence text, one line per section, without citation markers.
pub fn article_text(article: &Article) -> String {
    let mut lines = Vec::new();
    if !article.lead.is_empty() {
        lines.push(article.lead.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" "));
    }
    fn walk(section: &storm_core::ArticleSection, lines: &mut Vec<String>) {
        if !section.sentences.is_empty() {
            lines.push(section.sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" "));
        }
        for sub in &section.subsections {
            walk(sub, lines);
        }
    }
    for s in &article.sections {
        walk(s, &mut lines);
    }
    lines.join("\n")
}

fn outline_metrics(report: &mut MetricsReport, outline: &Outline, truth: &GroundTruth, ev: &Evaluator) {
    let predicted = HeadingSet::from_outline(outline);
    match soft_heading_recall(&truth.headings, &predicted, ev.embedder) {
        Ok(v) => report.soft_heading_recall = Some(v),
        Err(e) => report.missing(&["soft_heading_recall"], &e.to_string()),
    }
    match heading_entity_recall(&truth.headings, &predicted, ev.ner) {
        Ok(r) => {
            if r.vacuous {
                report.vacuous.push("heading_entity_recall".into());
            }
            report.heading_entity_recall = Some(r.percent);
        }
        Err(e) => report.missing(&["heading_entity_recall"], &e.to_string()),
    }
}

fn article_metrics(report: &mut MetricsReport, article: &Article, truth: &GroundTruth, ev: &Evaluator) {
    let text = article_text(article);
    match rouge1(&text, &truth.text) {
        Ok(s) => report.rouge1 = Some(s),
        Err(e) => report.missing(&["rouge1"], &e.to_string()),
    }
    match rouge_l(&text, &truth.text) {
        Ok(s) => report.rouge_l = Some(s),
        Err(e) => report.missing(&["rougeL"], &e.to_string()),
    }
    let r = article_entity_recall(&text, &truth.text, ev.ner);
    if r.vacuous {
        report.vacuous.push("article_entity_recall".into());
    }
    report.article_entity_recall = Some(r.percent);
}

const OUTLINE_FIELDS: &[&str] = &["soft_heading_recall", "heading_entity_recall"];
const ARTICLE_TEXT_FIELDS: &[&str] = &["rouge1", "rougeL", "article_entity_recall"];
const CITATION_FIELDS: &[&str] = &["citation_recall", "citation_precision"];

/// Computes what the inputs allow. Comparison metrics need `truth`;
/// citation metrics need an article and a judge.
pub fn evaluate(outline: Option<&Outline>, article: Option<&Article>, truth: Option<&GroundTruth>, ev: &Evaluator) -> MetricsReport {
    let mut report = MetricsReport::default();
    match (outline, truth) {
        (Some(o), Some(t)) => outline_metrics(&mut report, o, t, ev),
        (None, _) => report.missing(OUTLINE_FIELDS, "no outline"),
        (_, None) => report.missing(OUTLINE_FIELDS, "no ground truth"),
    }
    let Some(article) = article else {
        report.missing(ARTICLE_TEXT_FIELDS, "no article");
        report.missing(CITATION_FIELDS, "no article");
        report.missing(&["uncited_sentence_count"], "no article");
        return report;
    };
    match truth {
        Some(t) => article_metrics(&mut report, article, t, ev),
        None => report.missing(ARTICLE_TEXT_FIELDS, "no ground truth"),
    }
    report.uncited_sentence_count = Some(article.uncited_sentence_count());
    let Some(judge) = ev.judge else {
        report.missing(CITATION_FIELDS, "no judge configured");
        return report;
    };
    match citation_scores(article, &article.references, judge) {
        Ok(s) => {
            report.citation_recall = s.recall;
            report.citation_precision = s.precision;
            if s.recall.is_none() {
                report.missing(&["citation_recall"], "article has no body sentences");
            }
            if s.precision.is_none() {
                report.missing(&["citation_precision"], "article cites nothing");
            }
        }
        Err(e) => {
            log::warn!("citation metrics unavailable: {e}");
            report.missing(CITATION_FIELDS, &e.to_string());
        }
    }
    report
}

/// Evaluates the outline and, when written, the article of a run, and
/// stores the report as `metrics.json`. Evaluation is never sealed, so it
/// can be rerun against another ground truth.
pub fn evaluate_run(dir: &mut RunDir, truth: Option<&GroundTruth>, ev: &Evaluator) -> Result<MetricsReport, EvalError> {
    if !dir.has_artifact(OUTLINE) {
        return Err(storm_core::CoreError::MissingArtifact(format!("{OUTLINE} (run research first)")).into());
    }
    let outline = load_outline(dir)?;
    let article: Option<Article> = if dir.has_artifact(ARTICLE_JSON) { Some(dir.read_json(ARTICLE_JSON)?) } else { None };
    let report = evaluate(Some(&outline), article.as_ref(), truth, ev);
    dir.write_json(METRICS, Stage::Evaluation, &report)?;
    Ok(report)
}
