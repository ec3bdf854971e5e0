//! Wikimedia endpoints used for curation.

use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use storm_http::{HttpClient, HttpError, HttpRequest};
use storm_retrieval::wiki::strip_tags;
use storm_retrieval::WikiClient;

use crate::{FreshWikiError, QualityClass, YearMonth};

pub const METRICS_API: &str = "https://wikimedia.org/api/rest_v1";
pub const ACTION_API: &str = storm_retrieval::wiki::DEFAULT_API;
pub const QUALITY_API: &str = "https://api.wikimedia.org/service/lw/inference/v1/models/enwiki-articlequality:predict";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoints {
    pub metrics: String,
    pub action: String,
    pub quality: String,
}

impl Default for Endpoints {
    fn default() -> Self {
        Endpoints { metrics: METRICS_API.into(), action: ACTION_API.into(), quality: QUALITY_API.into() }
    }
}

impl Endpoints {
    pub fn top_edited_url(&self, month: YearMonth) -> String {
        format!(
            "{}/metrics/edited-pages/top-by-edits/en.wikipedia/all-editor-types/content/{:04}/{:02}/all-days",
            self.metrics.trim_end_matches('/'),
            month.year,
            month.month
        )
    }

    pub fn quality_request(&self, revision: u64) -> HttpRequest {
        HttpRequest::post_json(&self.quality, &json!({ "rev_id": revision }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidatePage {
    pub title: String,
    pub month: YearMonth,
    pub edit_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality_class: Option<QualityClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub id: u64,
    pub timestamp: DateTime<Utc>,
}

/// A page's current revision and its predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub title: String,
    pub revision: Revision,
    pub quality: QualityClass,
}

/// Raw material of a dataset entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageSnapshot {
    pub title: String,
    /// (heading, level) for every section, level 1 at the top.
    pub toc: Vec<(String, usize)>,
    pub extract: String,
    pub wikitext: String,
}

pub struct WikimediaClient {
    http: Arc<dyn HttpClient>,
    endpoints: Endpoints,
    wiki: WikiClient,
    today: NaiveDate,
}

fn decode(what: &str, e: impl std::fmt::Display) -> FreshWikiError {
    FreshWikiError::Decode { what: what.to_string(), message: e.to_string() }
}

impl WikimediaClient {
    /// `today` decides which months are still in the future.
    pub fn new(http: Arc<dyn HttpClient>, endpoints: Endpoints, today: NaiveDate) -> Self {
        let wiki = WikiClient::new(Arc::clone(&http), endpoints.action.clone());
        WikimediaClient { http, endpoints, wiki, today }
    }

    pub fn endpoints(&self) -> &Endpoints {
        &self.endpoints
    }

    /// At most 100 pages by edit count, most edited first.
    pub fn fetch_top_edited(&self, month: YearMonth) -> Result<Vec<CandidatePage>, FreshWikiError> {
        if month > YearMonth::of(self.today) {
            log::warn!("{month} is in the future; no edit counts yet");
            return Ok(Vec::new());
        }
        let url = self.endpoints.top_edited_url(month);
        let resp = self.http.send(&HttpRequest::get(&url)).map_err(|source| FreshWikiError::Http { context: format!("top edited pages for {month}"), source })?;
        if resp.status == 404 {
            log::warn!("no edit counts published for {month}");
            return Ok(Vec::new());
        }
        if !resp.is_success() {
            return Err(FreshWikiError::Http {
                context: format!("top edited pages for {month}"),
                source: HttpError::Transport(format!("{url} answered {}", resp.status)),
            });
        }
        let body: Value = resp.json().map_err(|e| decode(&format!("top edited pages for {month}"), e))?;
        let top = body.pointer("/items/0/results/0/top").and_then(Value::as_array).ok_or_else(|| decode(&format!("top edited pages for {month}"), "no items[0].results[0].top"))?;
        let mut pages: Vec<CandidatePage> = top
            .iter()
            .filter_map(|t| {
                let title = t.get("page_title")?.as_str()?.replace('_', " ");
                let edits = t.get("edits")?.as_u64()?;
                (edits > 0).then_some(CandidatePage { title, month, edit_count: edits, quality_class: None })
            })
            .collect();
        pages.sort_by(|a, b| b.edit_count.cmp(&a.edit_count).then_with(|| a.title.cmp(&b.title)));
        pages.truncate(100);
        Ok(pages)
    }

    /// Current revision of `title`, following redirects.
    pub fn latest_revision(&self, title: &str) -> Result<(String, Revision), FreshWikiError> {
        let v = self
            .wiki
            .get_json(&[("action", "query"), ("prop", "revisions"), ("titles", title), ("rvprop", "ids|timestamp"), ("redirects", "1")])
            .ok_or_else(|| FreshWikiError::Unavailable(format!("revision of {title}")))?;
        let page = v.pointer("/query/pages/0").ok_or_else(|| decode("revision query", "no pages"))?;
        if page.get("missing").is_some() {
            return Err(FreshWikiError::Unavailable(format!("{title} does not exist")));
        }
        let resolved = page.get("title").and_then(Value::as_str).unwrap_or(title).to_string();
        let rev = page.pointer("/revisions/0").ok_or_else(|| decode("revision query", "no revisions"))?;
        let id = rev.get("revid").and_then(Value::as_u64).ok_or_else(|| decode("revision query", "no revid"))?;
        let timestamp = rev
            .get("timestamp")
            .and_then(Value::as_str)
            .and_then(|t| t.parse::<DateTime<Utc>>().ok())
            .ok_or_else(|| decode("revision query", "no timestamp"))?;
        Ok((resolved, Revision { id, timestamp }))
    }

    /// Predicted assessment class of the current revision.
    pub fn assess_quality(&self, title: &str) -> Result<Assessment, FreshWikiError> {
        let (resolved, revision) = self.latest_revision(title)?;
        let resp = self
            .http
            .send(&self.endpoints.quality_request(revision.id))
            .map_err(|source| FreshWikiError::Http { context: format!("quality of {resolved}"), source })?;
        if !resp.is_success() {
            return Err(FreshWikiError::Unavailable(format!("quality of {resolved}: status {}", resp.status)));
        }
        let body: Value = resp.json().map_err(|e| decode("quality score", e))?;
        let pointer = format!("/enwiki/scores/{}/articlequality/score/prediction", revision.id);
        let prediction = body.pointer(&pointer).and_then(Value::as_str).ok_or_else(|| decode("quality score", format!("no {pointer}")))?;
        let quality = prediction.parse().map_err(|e| decode("quality score", e))?;
        Ok(Assessment { title: resolved, revision, quality })
    }

    /// Section list and wikitext of `revision`, plain-text extract of the page.
    pub fn snapshot(&self, title: &str, revision: &Revision) -> Result<PageSnapshot, FreshWikiError> {
        let oldid = revision.id.to_string();
        let parsed = self
            .wiki
            .get_json(&[("action", "parse"), ("oldid", &oldid), ("prop", "sections|wikitext")])
            .ok_or_else(|| FreshWikiError::Unavailable(format!("sections of {title}")))?;
        let sections = parsed.pointer("/parse/sections").and_then(Value::as_array).ok_or_else(|| decode("parse", "no sections"))?;
        let toc = sections
            .iter()
            .filter_map(|s| {
                let line = strip_tags(s.get("line")?.as_str()?);
                let level = s.get("toclevel")?.as_u64()? as usize;
                (!line.is_empty()).then_some((line, level.max(1)))
            })
            .collect();
        let wikitext = parsed.pointer("/parse/wikitext").and_then(Value::as_str).unwrap_or_default().to_string();
        let ex = self
            .wiki
            .get_json(&[("action", "query"), ("prop", "extracts"), ("explaintext", "1"), ("exsectionformat", "wikitext"), ("titles", title), ("redirects", "1")])
            .ok_or_else(|| FreshWikiError::Unavailable(format!("plain text of {title}")))?;
        let extract = ex.pointer("/query/pages/0/extract").and_then(Value::as_str).ok_or_else(|| decode("extract", "no extract"))?.to_string();
        Ok(PageSnapshot { title: title.to_string(), toc, extract, wikitext })
    }
}
