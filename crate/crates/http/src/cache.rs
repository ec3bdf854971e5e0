use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{HttpClient, HttpError, HttpRequest, HttpResponse, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheMode {
    /// Serve hits, fetch and store misses.
    #[default]
    ReadWrite,
    /// Serve hits, fail on misses without touching the network.
    Offline,
    /// Always fetch, overwrite stored entries.
    Refresh,
}

/// Canonical request form: scheme and host lowercased, query pairs sorted,
/// JSON bodies re-serialized with sorted keys. Headers are not part of the
/// key so credentials never reach the cache.
pub(crate) fn canonical_request(request: &HttpRequest) -> String {
    let url = match url::Url::parse(&request.url) {
        Ok(mut u) => {
            let mut pairs: Vec<(String, String)> = u.query_pairs().map(|(k, v)| (k.into_owned(), v.into_owned())).collect();
            pairs.sort();
            u.set_fragment(None);
            if pairs.is_empty() {
                u.set_query(None);
            } else {
                u.query_pairs_mut().clear().extend_pairs(pairs);
            }
            u.to_string()
        }
        Err(_) => request.url.clone(),
    };
    let body = request.body.as_deref().map(|b| match serde_json::from_str::<serde_json::Value>(b) {
        Ok(v) => v.to_string(),
        Err(_) => b.to_string(),
    });
    let method = match request.method {
        Method::Get => "GET",
        Method::Post => "POST",
    };
    format!("{method} {url}\n{}", body.unwrap_or_default())
}

pub(crate) fn request_key(request: &HttpRequest) -> String {
    hex::encode(Sha256::digest(canonical_request(request).as_bytes()))
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    request: String,
    response: HttpResponse,
}

/// Directory of cached responses, one JSON file per request key.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, request: &HttpRequest) -> PathBuf {
        self.dir.join(format!("{}.json", request_key(request)))
    }

    pub fn get(&self, request: &HttpRequest) -> Result<Option<HttpResponse>, HttpError> {
        let path = self.path(request);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| HttpError::Cache(format!("{}: {e}", path.display())))?;
        let entry: CacheEntry =
            serde_json::from_str(&text).map_err(|e| HttpError::Cache(format!("{}: {e}", path.display())))?;
        Ok(Some(entry.response))
    }

    pub fn put(&self, request: &HttpRequest, response: &HttpResponse) -> Result<(), HttpError> {
        fs::create_dir_all(&self.dir).map_err(|e| HttpError::Cache(format!("{}: {e}", self.dir.display())))?;
        let entry = CacheEntry { request: canonical_request(request), response: response.clone() };
        let mut bytes = serde_json::to_vec_pretty(&entry).map_err(|e| HttpError::Cache(e.to_string()))?;
        bytes.push(b'\n');
        let path = self.path(request);
        let tmp = path.with_extension("tmp~");
        fs::write(&tmp, bytes).map_err(|e| HttpError::Cache(format!("{}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path).map_err(|e| HttpError::Cache(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| rd.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "json")).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Wraps a client with a [`DiskCache`]. Transient failures (429, 5xx) are
/// never stored.
pub struct CachingClient<C> {
    inner: C,
    cache: DiskCache,
    mode: CacheMode,
}

impl<C: HttpClient> CachingClient<C> {
    pub fn new(inner: C, cache: DiskCache, mode: CacheMode) -> Self {
        CachingClient { inner, cache, mode }
    }

    pub fn cache(&self) -> &DiskCache {
        &self.cache
    }

    pub fn mode(&self) -> CacheMode {
        self.mode
    }
}

impl<C: HttpClient> HttpClient for CachingClient<C> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, HttpError> {
        if self.mode != CacheMode::Refresh {
            if let Some(hit) = self.cache.get(request)? {
                return Ok(hit);
            }
        }
        if self.mode == CacheMode::Offline {
            return Err(HttpError::Offline(canonical_request(request).lines().next().unwrap_or("").to_string()));
        }
        let response = self.inner.send(request)?;
        if !response.is_transient_failure() {
            self.cache.put(request, &response)?;
        } else {
            log::debug!("not caching transient {} for {}", response.status, request.url);
        }
        Ok(response)
    }
}
