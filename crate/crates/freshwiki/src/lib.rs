//! Curation of recent, high-quality Wikipedia articles as ground truth.
//!
//! [`build_dataset`] takes the most edited pages of each requested month,
//! keeps pages predicted B-class or better that are not lists and have at
//! least one content section, snapshots their plain text and headings, and
//! optionally drops articles over a word cap. [`write_dataset`] stores one
//! JSON file per entry plus `index.json`.
//!
//! All traffic goes through an [`HttpClient`](storm_http::HttpClient); wrap
//! it in a [`CachingClient`](storm_http::CachingClient) so reruns are
//! reproducible.

pub mod api;
mod dataset;
mod error;
mod month;
mod quality;
pub mod text;

pub use api::{Assessment, CandidatePage, Endpoints, PageSnapshot, Revision, WikimediaClient};
pub use dataset::{
    build_dataset, dedupe_candidates, entry_path, is_list_title, load_dataset, make_entry, quality_filter, read_index, recheck, structural_filter,
    write_dataset, BuildOptions, BuildReport, DatasetEntry, DatasetIndex, IndexEntry, Skipped, INDEX,
};
pub use error::FreshWikiError;
pub use month::YearMonth;
pub use quality::QualityClass;
