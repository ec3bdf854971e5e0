use std::collections::{HashMap, VecDeque};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::backend::{ChatBackend, ChatRequest};
use crate::error::LmError;
use crate::params::ModelRole;

/// One logged model call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub template: String,
    pub role: ModelRole,
    pub bindings_hash: String,
    pub prompt: String,
    pub response: String,
}

/// Wraps a backend and remembers every successful exchange.
pub struct RecordingBackend<B> {
    inner: B,
    calls: Mutex<Vec<(String, String, String)>>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend { inner, calls: Mutex::new(Vec::new()) }
    }

    /// `(template, bindings_hash, response)` triples in call order.
    pub fn calls(&self) -> Vec<(String, String, String)> {
        self.calls.lock().expect("recording lock poisoned").clone()
    }

    /// Replay fixture of everything recorded so far.
    pub fn to_replay(&self) -> ReplayBackend {
        ReplayBackend::from_triples(self.calls())
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        let out = self.inner.chat(request)?;
        self.calls.lock().expect("recording lock poisoned").push((
            request.template.clone(),
            request.bindings_hash.clone(),
            out.clone(),
        ));
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub template: String,
    pub bindings_hash: String,
    pub response: String,
}

/// Serves recorded responses keyed by `(template, bindings hash)`.
///
/// Repeated identical calls are answered from a per-key queue in recorded
/// order; the last response is reused once the queue runs dry. A key that
/// was never recorded is an error rather than a guess.
#[derive(Debug, Default)]
pub struct ReplayBackend {
    queues: Mutex<HashMap<(String, String), VecDeque<String>>>,
    last: Mutex<HashMap<(String, String), String>>,
}

impl ReplayBackend {
    pub fn from_triples(calls: impl IntoIterator<Item = (String, String, String)>) -> Self {
        let mut queues: HashMap<(String, String), VecDeque<String>> = HashMap::new();
        for (t, h, r) in calls {
            queues.entry((t, h)).or_default().push_back(r);
        }
        ReplayBackend { queues: Mutex::new(queues), last: Mutex::new(HashMap::new()) }
    }

    pub fn from_records(records: &[CallRecord]) -> Self {
        Self::from_triples(records.iter().map(|r| (r.template.clone(), r.bindings_hash.clone(), r.response.clone())))
    }

    /// Loads a JSON array of [`CallRecord`] or [`ReplayEntry`] objects.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let entries: Vec<ReplayEntry> = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        Ok(Self::from_triples(entries.into_iter().map(|e| (e.template, e.bindings_hash, e.response))))
    }

    pub fn remaining(&self) -> usize {
        self.queues.lock().expect("replay lock poisoned").values().map(VecDeque::len).sum()
    }
}

impl ChatBackend for ReplayBackend {
    fn chat(&self, request: &ChatRequest) -> Result<String, LmError> {
        let key = (request.template.clone(), request.bindings_hash.clone());
        let next = self.queues.lock().expect("replay lock poisoned").get_mut(&key).and_then(VecDeque::pop_front);
        let mut last = self.last.lock().expect("replay lock poisoned");
        match next {
            Some(r) => {
                last.insert(key, r.clone());
                Ok(r)
            }
            None => last.get(&key).cloned().ok_or(LmError::ReplayMiss {
                template: request.template.clone(),
                bindings_hash: request.bindings_hash.clone(),
            }),
        }
    }
}
