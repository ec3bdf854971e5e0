//! The article pipeline.
//!
//! Research ([`prewriting`]) discovers perspectives, simulates grounded
//! writer/expert conversations and turns what they found into an outline.
//! Writing ([`writing`]) drafts each top-level section from the references
//! that best match it, removes repetition, adds a lead and enforces the
//! length cap. [`baselines`] holds the comparison systems and [`run`] drives
//! both stages against a run directory.

pub mod baselines;
mod config;
mod error;
pub mod markup;
pub mod prewriting;
pub mod run;
pub mod writing;

pub use config::{PrewritingConfig, SectionOrder, Services, WritingConfig};
pub use error::PipelineError;
