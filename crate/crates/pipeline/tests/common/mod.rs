#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{TimeZone, Utc};
use storm_core::Topic;
use storm_http::RetryPolicy;
use storm_lm::{ChatRequest, FnBackend, LmError, LmGateway, ModelParams};
use storm_pipeline::Services;
use storm_retrieval::{HashEmbedder, ReplaySearch, SearchBackend, SearchError, SearchHit, Searcher, TrustPolicy};

pub fn topic() -> Topic {
    Topic::new("Harbor Bridge").unwrap()
}

pub fn hit(url: &str, snippet: &str) -> SearchHit {
    SearchHit { url: url.into(), title: format!("Page {url}"), description: String::new(), snippets: vec![snippet.into()] }
}

pub fn searcher(backend: Arc<dyn SearchBackend>) -> Searcher {
    Searcher::new(backend).with_retry(RetryPolicy::immediate(1)).with_clock(Arc::new(|| Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()))
}

pub fn services_with<F>(lm: F, search: Arc<dyn SearchBackend>) -> Services
where
    F: Fn(&ChatRequest) -> Result<String, LmError> + Send + Sync + 'static,
{
    let gateway = LmGateway::single(Arc::new(FnBackend(lm)), ModelParams::new("mock")).with_retry(RetryPolicy::immediate(1));
    Services {
        lm: Arc::new(gateway),
        searcher: Arc::new(searcher(search)),
        trust: TrustPolicy::default(),
        wiki: None,
        embedder: Arc::new(HashEmbedder::default()),
    }
}

pub fn replay(pairs: &[(&str, Vec<SearchHit>)]) -> Arc<dyn SearchBackend> {
    Arc::new(ReplaySearch::new(pairs.iter().map(|(q, h)| (q.to_string(), h.clone())).collect::<HashMap<_, _>>()))
}

pub fn no_search() -> Arc<dyn SearchBackend> {
    Arc::new(ReplaySearch::default())
}

/// Every query fails as if the service were down.
pub struct DownSearch;

impl SearchBackend for DownSearch {
    fn search(&self, _: &str, _: usize) -> Result<Vec<SearchHit>, SearchError> {
        Err(SearchError::Unreachable("connection refused".into()))
    }
}

/// Counts queries and answers each with one page named after the query.
#[derive(Default)]
pub struct CountingSearch {
    pub calls: AtomicUsize,
    pub queries: Mutex<Vec<String>>,
}

impl SearchBackend for CountingSearch {
    fn search(&self, query: &str, _: usize) -> Result<Vec<SearchHit>, SearchError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.queries.lock().unwrap().push(query.to_string());
        let slug: String = query.chars().map(|c| if c.is_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect();
        Ok(vec![hit(&format!("https://source.example/{slug}"), &format!("Facts about {query}."))])
    }
}

/// Responses keyed by template, in call order per template.
pub fn scripted(script: Vec<(&'static str, Vec<&'static str>)>) -> impl Fn(&ChatRequest) -> Result<String, LmError> + Send + Sync {
    let queues: Mutex<HashMap<&'static str, std::collections::VecDeque<&'static str>>> =
        Mutex::new(script.into_iter().map(|(t, r)| (t, r.into_iter().collect())).collect());
    move |req: &ChatRequest| {
        let mut q = queues.lock().unwrap();
        let Some(queue) = q.get_mut(req.template.as_str()) else {
            return Err(LmError::Backend(format!("unscripted template {}", req.template)));
        };
        let next = if queue.len() > 1 { queue.pop_front() } else { queue.front().copied() };
        Ok(next.unwrap_or_default().to_string())
    }
}
