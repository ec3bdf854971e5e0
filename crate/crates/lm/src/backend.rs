use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;
use storm_http::{HttpClient, HttpError, HttpRequest};

use crate::error::LmError;
use crate::params::ModelParams;

pub const LM_KEY_VAR: &str = "STORM_LM_KEY";

/// A rendered prompt on its way to a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub template: String,
    pub prompt: String,
    pub params: ModelParams,
    pub bindings_hash: String,
}

pub trait ChatBackend: Send + Sync {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for Arc<T> {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        (**self).chat(request)
    }
}

/// Backend driven by a closure, for tests and simulations.
pub struct FnBackend<F>(pub F);

impl<F> ChatBackend for FnBackend<F>
where
    F: Fn(&ChatRequest) -> Result<String, LmError> + Send + Sync,
{
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        (self.0)(request)
    }
}

/// OpenAI-compatible `POST {base}/chat/completions`.
pub struct OpenAiBackend {
    http: Arc<dyn HttpClient>,
    base_url: String,
    api_key: Option<String>,
}

impl OpenAiBackend {
    pub fn new(http: Arc<dyn HttpClient>, base_url: impl Into<String>, api_key: Option<String>) -> Self {
        OpenAiBackend { http, base_url: base_url.into().trim_end_matches('/').to_string(), api_key }
    }

    /// Reads the key from `STORM_LM_KEY`.
    pub fn from_env(http: Arc<dyn HttpClient>, base_url: impl Into<String>) -> Self {
        Self::new(http, base_url, std::env::var(LM_KEY_VAR).ok().filter(|k| !k.is_empty()))
    }

    fn body(request: &ChatRequest) -> serde_json::Value {
        json!({
            "model": request.params.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.params.temperature,
            "top_p": request.params.top_p,
            "max_tokens": request.params.max_tokens,
        })
    }
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl ChatBackend for OpenAiBackend {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        let mut req = HttpRequest::post_json(format!("{}/chat/completions", self.base_url), &Self::body(request));
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let resp = match self.http.send(&req) {
            Ok(r) => r,
            Err(HttpError::Transport(e)) => return Err(LmError::Transient(e)),
            Err(e) => return Err(LmError::Backend(e.to_string())),
        };
        if resp.is_transient_failure() {
            return Err(LmError::Transient(format!("status {}", resp.status)));
        }
        if !resp.is_success() {
            if resp.body.contains("context_length_exceeded") {
                return Err(LmError::ContextLength(resp.body));
            }
            return Err(LmError::Backend(format!("status {}: {}", resp.status, resp.body)));
        }
        let parsed: Completion = resp.json().map_err(|e| LmError::Backend(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| LmError::Backend("completion has no content".into()))
    }
}
