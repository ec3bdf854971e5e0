use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use storm_core::estimate_tokens;
use storm_http::{retry, FairLimiter, RetryPolicy};

use crate::backend::{ChatBackend, ChatRequest};
use crate::error::LmError;
use crate::params::{ModelParams, ModelRole};
use crate::prompt::Bindings;
use crate::record::CallRecord;
use crate::registry::PromptRegistry;

pub const DEFAULT_CONCURRENCY: usize = 8;
pub const DEFAULT_CONTEXT_WINDOW: usize = 16_384;

/// A model endpoint bound to one role.
pub struct Endpoint {
    pub backend: Arc<dyn ChatBackend>,
    pub params: ModelParams,
    pub context_window: usize,
    limiter: FairLimiter,
}

impl Endpoint {
    pub fn new(backend: Arc<dyn ChatBackend>, params: ModelParams) -> Self {
        Endpoint { backend, params, context_window: DEFAULT_CONTEXT_WINDOW, limiter: FairLimiter::new(DEFAULT_CONCURRENCY) }
    }

    pub fn with_context_window(mut self, tokens: usize) -> Self {
        self.context_window = tokens;
        self
    }

    pub fn with_concurrency(mut self, limit: usize) -> Self {
        self.limiter = FairLimiter::new(limit);
        self
    }

    pub fn concurrency(&self) -> usize {
        self.limiter.capacity()
    }
}

pub struct LmGateway {
    registry: PromptRegistry,
    endpoints: HashMap<ModelRole, Endpoint>,
    retry: RetryPolicy,
    log: Mutex<Vec<CallRecord>>,
}

impl LmGateway {
    pub fn new(registry: PromptRegistry) -> Self {
        LmGateway { registry, endpoints: HashMap::new(), retry: RetryPolicy::default(), log: Mutex::new(Vec::new()) }
    }

    /// Both roles served by the same backend and parameters.
    pub fn single(backend: Arc<dyn ChatBackend>, params: ModelParams) -> Self {
        let mut g = Self::new(PromptRegistry::default());
        for role in ModelRole::ALL {
            g = g.with_endpoint(role, Endpoint::new(backend.clone(), params.clone()));
        }
        g
    }

    pub fn with_endpoint(mut self, role: ModelRole, endpoint: Endpoint) -> Self {
        self.endpoints.insert(role, endpoint);
        self
    }

    pub fn with_retry(mut self, policy: RetryPolicy) -> Self {
        self.retry = policy;
        self
    }

    pub fn registry(&self) -> &PromptRegistry {
        &self.registry
    }

    pub fn endpoint(&self, role: ModelRole) -> Option<&Endpoint> {
        self.endpoints.get(&role)
    }

    /// Fails unless every role has an endpoint.
    pub fn ensure_configured(&self) -> Result<(), LmError> {
        for role in ModelRole::ALL {
            if !self.endpoints.contains_key(&role) {
                return Err(LmError::RoleNotConfigured(role.to_string()));
            }
        }
        Ok(())
    }

    /// Renders `template` with `bindings` and sends it to the endpoint of
    /// `role`. Prompts that cannot fit the endpoint's context window are
    /// refused before sending.
    pub fn complete(&self, template: &str, bindings: &Bindings, role: ModelRole) -> Result<String, LmError> {
        let t = self.registry.get(template).ok_or_else(|| LmError::UnknownTemplate(template.into()))?;
        let prompt = t.render(bindings)?;
        let endpoint = self.endpoints.get(&role).ok_or_else(|| LmError::RoleNotConfigured(role.to_string()))?;
        let prompt_tokens = estimate_tokens(&prompt);
        let max_tokens = endpoint.params.max_tokens;
        if prompt_tokens + max_tokens > endpoint.context_window {
            return Err(LmError::ContextLengthExceeded { prompt_tokens, max_tokens, window: endpoint.context_window });
        }
        let request = ChatRequest {
            template: template.into(),
            prompt,
            params: endpoint.params.clone(),
            bindings_hash: bindings.digest(),
        };
        let result = {
            let _permit = endpoint.limiter.acquire();
            retry(&self.retry, |_| endpoint.backend.chat(&request), LmError::is_transient)
        };
        let response = match result {
            Ok(r) => r,
            Err(LmError::Transient(last)) => {
                return Err(LmError::Unreachable { attempts: self.retry.attempts.max(1), last });
            }
            Err(e) => return Err(e),
        };
        self.log.lock().expect("call log poisoned").push(CallRecord {
            template: request.template,
            role,
            bindings_hash: request.bindings_hash,
            prompt: request.prompt,
            response: response.clone(),
        });
        Ok(response)
    }

    /// Calls logged so far, in completion order.
    pub fn calls(&self) -> Vec<CallRecord> {
        self.log.lock().expect("call log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("call log poisoned").len()
    }
}
