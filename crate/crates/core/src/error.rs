use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("topic title is empty")]
    EmptyTopic,
    #[error("invalid url `{0}`: {1}")]
    InvalidUrl(String, String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("artifact `{name}` belongs to completed stage {stage:?} and cannot be rewritten")]
    StageSealed { name: String, stage: crate::run::Stage },
    #[error("run config snapshot differs from the one recorded at creation")]
    ConfigChanged,
    #[error("missing artifact `{0}`")]
    MissingArtifact(String),
}

impl CoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io { path: path.into(), source }
    }
}
