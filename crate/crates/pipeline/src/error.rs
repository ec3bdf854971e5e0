use storm_core::CoreError;
use storm_lm::LmError;
use storm_retrieval::{EmbedError, SearchError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0}")]
    Invalid(String),
    /// Every call to the outside services failed, so there is nothing to build on.
    #[error("{0}")]
    NoResearch(String),
}

impl PipelineError {
    /// Failures of an outside service, as opposed to bad input or local I/O.
    pub fn is_upstream(&self) -> bool {
        matches!(self, PipelineError::Lm(_) | PipelineError::Search(_) | PipelineError::Embed(EmbedError::Backend(_)) | PipelineError::NoResearch(_))
    }
}
