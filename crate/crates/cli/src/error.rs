use storm_core::CoreError;
use storm_eval::EvalError;
use storm_freshwiki::FreshWikiError;
use storm_pipeline::PipelineError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UPSTREAM: i32 = 3;
pub const EXIT_MISSING: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("upstream service error: {0}")]
    Upstream(String),
    #[error("missing artifact: {0}")]
    Missing(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Upstream(_) => EXIT_UPSTREAM,
            CliError::Missing(_) => EXIT_MISSING,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::MissingArtifact(what) => CliError::Missing(what),
            CoreError::ConfigChanged | CoreError::EmptyTopic | CoreError::InvalidUrl(..) => CliError::Config(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_upstream() {
            return CliError::Upstream(e.to_string());
        }
        match e {
            PipelineError::Core(c) => c.into(),
            PipelineError::Invalid(m) => CliError::Config(m),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Core(c) => c.into(),
            EvalError::Pipeline(p) => p.into(),
            EvalError::Judge(_) | EvalError::Embed(storm_retrieval::EmbedError::Backend(_)) => CliError::Upstream(e.to_string()),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<FreshWikiError> for CliError {
    fn from(e: FreshWikiError) -> Self {
        match e {
            FreshWikiError::NoMonths => CliError::Config(e.to_string()),
            FreshWikiError::Http { .. } | FreshWikiError::Unavailable(_) => CliError::Upstream(e.to_string()),
            FreshWikiError::Core(c) => c.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}
