use crate::prompt::RenderError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LmError {
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("no prompt template named `{0}`")]
    UnknownTemplate(String),
    #[error("model role `{0}` has no configured endpoint")]
    RoleNotConfigured(String),
    #[error("prompt needs ~{prompt_tokens} tokens plus {max_tokens} for output, context window is {window}")]
    ContextLengthExceeded { prompt_tokens: usize, max_tokens: usize, window: usize },
    /// The endpoint itself refused the prompt as too long.
    #[error("endpoint reports context length exceeded: {0}")]
    ContextLength(String),
    /// Worth retrying: connection failures, rate limits, server errors.
    #[error("transient endpoint failure: {0}")]
    Transient(String),
    #[error("endpoint unreachable after {attempts} attempts: {last}")]
    Unreachable { attempts: u32, last: String },
    #[error("endpoint rejected the request: {0}")]
    Backend(String),
    #[error("no recorded response for template `{template}` with bindings {bindings_hash}")]
    ReplayMiss { template: String, bindings_hash: String },
}

impl LmError {
    pub fn is_transient(&self) -> bool {
        matches!(self, LmError::Transient(_))
    }
}
