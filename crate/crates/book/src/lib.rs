//! The guide in `book/src`, one module per chapter, so `cargo test` runs its
//! code blocks.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/outlines.md")]
pub mod outlines {}

#[doc = include_str!("../../../book/src/references.md")]
pub mod references {}

#[doc = include_str!("../../../book/src/research.md")]
pub mod research {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/curation.md")]
pub mod curation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
