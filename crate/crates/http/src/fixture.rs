use std::collections::HashMap;
use std::sync::Mutex;

use crate::cache::request_key;
use crate::{HttpClient, HttpError, HttpRequest, HttpResponse};

/// Serves canned responses keyed by normalized request and records every
/// request it sees. Unknown requests get a 404.
#[derive(Default)]
pub struct FixtureClient {
    responses: HashMap<String, HttpResponse>,
    log: Mutex<Vec<HttpRequest>>,
    fail_all: bool,
}

impl FixtureClient {
    pub fn new() -> Self {
        Self::default()
    }

    /// A client whose every request fails at the transport level.
    pub fn unreachable() -> Self {
        FixtureClient { fail_all: true, ..Self::default() }
    }

    pub fn with(mut self, request: HttpRequest, response: HttpResponse) -> Self {
        self.insert(request, response);
        self
    }

    pub fn with_get(self, url: &str, status: u16, body: impl Into<String>) -> Self {
        self.with(HttpRequest::get(url), HttpResponse { status, body: body.into() })
    }

    pub fn insert(&mut self, request: HttpRequest, response: HttpResponse) {
        self.responses.insert(request_key(&request), response);
    }

    pub fn requests(&self) -> Vec<HttpRequest> {
        self.log.lock().expect("fixture log poisoned").clone()
    }

    pub fn request_count(&self) -> usize {
        self.log.lock().expect("fixture log poisoned").len()
    }
}

impl HttpClient for FixtureClient {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, HttpError> {
        self.log.lock().expect("fixture log poisoned").push(request.clone());
        if self.fail_all {
            return Err(HttpError::Transport(format!("connection refused: {}", request.url)));
        }
        Ok(self
            .responses
            .get(&request_key(request))
            .cloned()
            .unwrap_or(HttpResponse { status: 404, body: String::new() }))
    }
}
