use storm_retrieval::EmbedError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("ground-truth heading set is empty")]
    EmptyGroundTruth,
    #[error("heading index {index} out of range for a set of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{0} text has no tokens")]
    EmptyText(&'static str),
    #[error("embedding failed: {0}")]
    Embed(#[from] EmbedError),
    #[error("entailment judge failed: {0}")]
    Judge(String),
    #[error(transparent)]
    Core(#[from] storm_core::CoreError),
    #[error(transparent)]
    Pipeline(#[from] storm_pipeline::PipelineError),
}
