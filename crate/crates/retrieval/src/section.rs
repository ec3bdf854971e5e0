use std::cmp::Ordering;

use storm_core::{OutlineNode, RefId, ReferenceStore, SourceDocument};

use crate::embed::{cosine_similarity, EmbedError, EmbeddingProvider};

pub const DEFAULT_SECTION_K: usize = 10;

/// The retrieval query for a section: its heading followed by every
/// descendant heading.
pub fn section_query(node: &OutlineNode) -> String {
    let mut parts = vec![node.heading.as_str()];
    parts.extend(node.descendant_headings());
    parts.join(" ")
}

/// Scores every document by its best snippet against the section query and
/// returns the top `k`, highest first, ties to the lower id.
pub fn retrieve_for_section(
    store: &ReferenceStore,
    node: &OutlineNode,
    k: usize,
    embedder: &dyn EmbeddingProvider,
) -> Result<Vec<(RefId, SourceDocument)>, EmbedError> {
    Ok(rank_documents(store, &section_query(node), embedder)?
        .into_iter()
        .take(k)
        .map(|(id, _)| (id, store.get(id).expect("ranked ids come from the store").clone()))
        .collect())
}

/// `(id, score)` for every document, sorted by non-increasing score then id.
/// Snippets that embed to a zero vector do not count; a document with no
/// scorable snippet gets -1.
pub fn rank_documents(store: &ReferenceStore, query: &str, embedder: &dyn EmbeddingProvider) -> Result<Vec<(RefId, f64)>, EmbedError> {
    if store.is_empty() {
        log::warn!("section retrieval over an empty reference store");
        return Ok(Vec::new());
    }
    let q = embedder.embed(query)?;
    let mut scored = Vec::with_capacity(store.len());
    for (id, doc) in store.iter() {
        let snippets: Vec<&str> = doc.snippets.iter().map(String::as_str).collect();
        let mut best = -1.0f64;
        for v in embedder.embed_batch(&snippets)? {
            match cosine_similarity(&q, &v) {
                Ok(s) => best = best.max(s),
                Err(EmbedError::ZeroVector) => {}
                Err(e) => return Err(e),
            }
        }
        scored.push((id, best));
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(scored)
}
