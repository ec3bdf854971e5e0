use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use storm_core::{normalize_url, OrderingKey, SourceDocument};
use storm_http::{retry, FairLimiter, HttpClient, HttpError, HttpRequest, RetryPolicy};

pub const SEARCH_KEY_VAR: &str = "STORM_SEARCH_KEY";
pub const MAX_SNIPPET_CHARS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchQuery {
    pub text: String,
    pub origin_question: String,
    pub ordering_key: OrderingKey,
}

impl SearchQuery {
    /// `None` for blank query text.
    pub fn new(text: &str, origin_question: &str, ordering_key: OrderingKey) -> Option<Self> {
        let text = text.trim();
        (!text.is_empty()).then(|| SearchQuery { text: text.into(), origin_question: origin_question.into(), ordering_key })
    }
}

/// A raw hit as a search engine returns it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub url: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub snippets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search backend unreachable: {0}")]
    Unreachable(String),
    #[error("search quota exceeded: {0}")]
    QuotaExceeded(String),
    #[error("search backend error: {0}")]
    Backend(String),
    #[error("no recorded results for query `{0}`")]
    ReplayMiss(String),
}

impl SearchError {
    fn is_transient(&self) -> bool {
        matches!(self, SearchError::Unreachable(_))
    }
}

pub trait SearchBackend: Send + Sync {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError>;
}

impl<T: SearchBackend + ?Sized> SearchBackend for Arc<T> {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        (**self).search(query, k)
    }
}

/// You.com-style web search: `GET {base}?query=..&num_web_results=k` with an
/// `X-API-Key` header, answering `{"hits": [...]}`.
pub struct WebSearch {
    http: Arc<dyn HttpClient>,
    base_url: String,
    api_key: Option<String>,
}

impl WebSearch {
    pub fn new(http: Arc<dyn HttpClient>, base_url: impl Into<String>, api_key: Option<String>) -> Self {
        WebSearch { http, base_url: base_url.into(), api_key }
    }

    pub fn from_env(http: Arc<dyn HttpClient>, base_url: impl Into<String>) -> Self {
        Self::new(http, base_url, std::env::var(SEARCH_KEY_VAR).ok().filter(|k| !k.is_empty()))
    }

    pub fn request(&self, query: &str, k: usize) -> Result<HttpRequest, SearchError> {
        let url = url::Url::parse_with_params(&self.base_url, &[("query", query), ("num_web_results", &k.to_string())])
            .map_err(|e| SearchError::Backend(format!("bad search url {}: {e}", self.base_url)))?;
        let mut req = HttpRequest::get(url.as_str());
        if let Some(key) = &self.api_key {
            req = req.header("X-API-Key", key.clone());
        }
        Ok(req)
    }
}

#[derive(Deserialize)]
struct HitsBody {
    #[serde(default)]
    hits: Vec<SearchHit>,
}

impl SearchBackend for WebSearch {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        let req = self.request(query, k)?;
        let resp = match self.http.send(&req) {
            Ok(r) => r,
            Err(HttpError::Transport(e)) => return Err(SearchError::Unreachable(e)),
            Err(e) => return Err(SearchError::Backend(e.to_string())),
        };
        match resp.status {
            402 | 403 if resp.body.to_ascii_lowercase().contains("quota") || resp.status == 402 => {
                Err(SearchError::QuotaExceeded(resp.body))
            }
            s if resp.is_transient_failure() => Err(SearchError::Unreachable(format!("status {s}"))),
            s if !resp.is_success() => Err(SearchError::Backend(format!("status {s}: {}", resp.body))),
            _ => resp.json::<HitsBody>().map(|b| b.hits).map_err(|e| SearchError::Backend(e.to_string())),
        }
    }
}

/// Results recorded per query text, as written by [`RecordingSearch`].
#[derive(Debug, Default)]
pub struct ReplaySearch {
    hits: HashMap<String, Vec<SearchHit>>,
}

impl ReplaySearch {
    pub fn new(hits: HashMap<String, Vec<SearchHit>>) -> Self {
        ReplaySearch { hits }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let hits = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(ReplaySearch { hits })
    }
}

impl SearchBackend for ReplaySearch {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        let hits = self.hits.get(query).ok_or_else(|| SearchError::ReplayMiss(query.into()))?;
        Ok(hits.iter().take(k).cloned().collect())
    }
}

/// Records every answered query so the results can be replayed.
pub struct RecordingSearch<B> {
    inner: B,
    seen: Mutex<HashMap<String, Vec<SearchHit>>>,
}

impl<B: SearchBackend> RecordingSearch<B> {
    pub fn new(inner: B) -> Self {
        RecordingSearch { inner, seen: Mutex::new(HashMap::new()) }
    }

    pub fn recorded(&self) -> std::collections::BTreeMap<String, Vec<SearchHit>> {
        self.seen.lock().expect("recording lock poisoned").clone().into_iter().collect()
    }
}

impl<B: SearchBackend> SearchBackend for RecordingSearch<B> {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        let hits = self.inner.search(query, k)?;
        let mut seen = self.seen.lock().expect("recording lock poisoned");
        let entry = seen.entry(query.to_string()).or_default();
        if hits.len() > entry.len() {
            *entry = hits.clone();
        }
        Ok(hits)
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

/// Search front end: retries, bounded concurrency, exclusion and truncation.
pub struct Searcher {
    backend: Arc<dyn SearchBackend>,
    limiter: FairLimiter,
    retry: RetryPolicy,
    clock: Clock,
}

impl Searcher {
    pub fn new(backend: Arc<dyn SearchBackend>) -> Self {
        Searcher { backend, limiter: FairLimiter::new(8), retry: RetryPolicy::default(), clock: Arc::new(Utc::now) }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_concurrency(mut self, limit: usize) -> Self {
        self.limiter = FairLimiter::new(limit);
        self
    }

    /// Timestamps documents with `clock` instead of the wall clock.
    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    /// At most `k` documents, in engine rank order, never the excluded page.
    /// Returned documents are not yet trust-checked.
    pub fn search(&self, query: &SearchQuery, k: usize, exclusion_url: Option<&str>) -> Result<Vec<SourceDocument>, SearchError> {
        let k = k.max(1);
        let hits = {
            let _permit = self.limiter.acquire();
            // Ask for one extra so dropping the excluded page still leaves k.
            retry(&self.retry, |_| self.backend.search(&query.text, k + 1), SearchError::is_transient)?
        };
        let excluded = exclusion_url.and_then(|u| normalize_url(u).ok());
        let now = (self.clock)();
        Ok(hits
            .into_iter()
            .filter(|h| {
                let key = normalize_url(&h.url).ok();
                key.is_some() && key != excluded
            })
            .take(k)
            .map(|h| to_document(h, now))
            .collect())
    }
}

fn to_document(hit: SearchHit, now: DateTime<Utc>) -> SourceDocument {
    let mut snippets: Vec<String> = hit.snippets.iter().map(|s| cap_chars(s.trim())).filter(|s| !s.is_empty()).collect();
    if snippets.is_empty() && !hit.description.trim().is_empty() {
        snippets.push(cap_chars(hit.description.trim()));
    }
    let title = if hit.title.trim().is_empty() { hit.url.clone() } else { hit.title.trim().to_string() };
    SourceDocument { url: hit.url, title, snippets, retrieved_at: now, trusted: false }
}

fn cap_chars(s: &str) -> String {
    match s.char_indices().nth(MAX_SNIPPET_CHARS) {
        Some((i, _)) => s[..i].to_string(),
        None => s.to_string(),
    }
}
