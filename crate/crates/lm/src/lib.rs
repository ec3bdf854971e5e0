//! Uniform access to chat-completion endpoints.
//!
//! Prompts live in a [`PromptRegistry`] and are rendered from named slot
//! bindings; [`LmGateway::complete`] routes the rendered prompt to the
//! endpoint configured for a [`ModelRole`], retries transient failures, and
//! logs every call so a run can be replayed byte for byte with
//! [`ReplayBackend`].

mod backend;
mod error;
mod gateway;
mod params;
pub mod parse;
mod prompt;
mod record;
mod registry;

pub use backend::{ChatBackend, ChatRequest, FnBackend, OpenAiBackend, LM_KEY_VAR};
pub use error::LmError;
pub use gateway::{Endpoint, LmGateway};
pub use params::{ModelParams, ModelRole};
pub use prompt::{Bindings, PromptTemplate, RenderError, Slot};
pub use record::{CallRecord, RecordingBackend, ReplayBackend, ReplayEntry};
pub use registry::{names, PromptRegistry};
