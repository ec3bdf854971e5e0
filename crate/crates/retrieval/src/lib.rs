//! Finding and ranking sources.
//!
//! [`Searcher`] queries a web search backend and drops the ground-truth page;
//! [`filter_trusted`] applies a [`TrustPolicy`]; [`WikiClient`] fetches
//! tables of contents of related pages; [`retrieve_for_section`] ranks the
//! collected references against an outline section with any
//! [`EmbeddingProvider`].

mod embed;
mod search;
mod section;
mod trust;
pub mod wiki;

pub use embed::{cosine_similarity, word_tokens, EmbedError, EmbeddingProvider, HashEmbedder, RemoteEmbedder, TableEmbedder, EMBED_KEY_VAR};
pub use search::{
    Clock, RecordingSearch, ReplaySearch, SearchBackend, SearchError, SearchHit, SearchQuery, Searcher, WebSearch, MAX_SNIPPET_CHARS,
    SEARCH_KEY_VAR,
};
pub use section::{rank_documents, retrieve_for_section, section_query, DEFAULT_SECTION_K};
pub use trust::{filter_trusted, TrustPolicy};
pub use wiki::{TocEntry, WikiClient};
