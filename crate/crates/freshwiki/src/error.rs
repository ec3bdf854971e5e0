use std::path::Path;

use storm_http::HttpError;

#[derive(Debug, thiserror::Error)]
pub enum FreshWikiError {
    #[error("at least one month is required")]
    NoMonths,
    #[error("{context}: {source}")]
    Http { context: String, source: HttpError },
    #[error("cannot read {what}: {message}")]
    Decode { what: String, message: String },
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] storm_core::CoreError),
}

impl FreshWikiError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        FreshWikiError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
