//! Domain types shared by every stage of the storm pipeline.
//!
//! Besides plain data (topics, outlines, conversations, references,
//! articles, run records) this crate owns the deterministic text-structure
//! parsers every other stage relies on: `#`-markup outlines, inline `[n]`
//! citation markers, and a rule-based sentence splitter.

pub mod article;
pub mod citation;
pub mod conversation;
pub mod error;
pub mod outline;
pub mod reference;
pub mod run;
pub mod sentence;
pub mod tokens;
pub mod topic;
pub mod url_norm;

pub use article::{Article, ArticleSection, CitedSentence};
pub use citation::extract_citations;
pub use conversation::{render_history, Conversation, DialogueTurn, Perspective, BASIC_FACT_DESCRIPTION, BASIC_FACT_WRITER};
pub use error::CoreError;
pub use outline::{parse_outline, serialize_outline, Outline, OutlineNode, OutlineParse};
pub use reference::{InsertError, OrderingKey, RefId, ReferenceMerger, ReferenceStore, SourceDocument};
pub use run::{RunDir, RunMode, RunRecord, Stage};
pub use sentence::split_sentences;
pub use tokens::estimate_tokens;
pub use topic::Topic;
pub use url_norm::normalize_url;
