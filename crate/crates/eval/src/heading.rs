//! Embedding-weighted soft set measures over heading multisets.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use storm_core::Outline;
use storm_retrieval::{cosine_similarity, EmbeddingProvider};

use crate::EvalError;

/// Headings of every level, flattened. Duplicates are kept: the soft count
/// of a repeated heading shrinks instead.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeadingSet {
    pub headings: Vec<String>,
}

impl HeadingSet {
    pub fn new<S: Into<String>>(headings: impl IntoIterator<Item = S>) -> Self {
        HeadingSet { headings: headings.into_iter().map(Into::into).collect() }
    }

    /// All outline headings in document order. The article title is not a
    /// node of a stored outline, so it is never included.
    pub fn from_outline(outline: &Outline) -> Self {
        HeadingSet { headings: outline.headings() }
    }

    pub fn len(&self) -> usize {
        self.headings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.headings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.headings.iter().map(String::as_str)
    }
}

/// Similarity between the distinct texts of `texts`, plus the distinct
/// index of each text. The diagonal is exactly 1 and negative cosines count
/// as 0.
struct Similarity {
    pair: Vec<Vec<f64>>,
    index: Vec<usize>,
}

impl Similarity {
    fn new(texts: &[&str], embedder: &dyn EmbeddingProvider) -> Result<Self, EvalError> {
        let mut unique: Vec<&str> = Vec::new();
        let mut slot: HashMap<&str, usize> = HashMap::new();
        let index: Vec<usize> = texts
            .iter()
            .map(|t| {
                *slot.entry(t).or_insert_with(|| {
                    unique.push(t);
                    unique.len() - 1
                })
            })
            .collect();
        let vectors = embedder.embed_batch(&unique)?;
        let mut pair = vec![vec![0.0; unique.len()]; unique.len()];
        for a in 0..unique.len() {
            pair[a][a] = 1.0;
            for b in a + 1..unique.len() {
                let s = cosine_similarity(&vectors[a], &vectors[b])?.max(0.0);
                pair[a][b] = s;
                pair[b][a] = s;
            }
        }
        // A zero vector only surfaces through a pair; a lone heading still needs checking.
        if unique.len() == 1 {
            cosine_similarity(&vectors[0], &vectors[0])?;
        }
        Ok(Similarity { pair, index })
    }

    /// Multiplicity of each distinct text within `range` of the input.
    fn counts(&self, range: std::ops::Range<usize>) -> Vec<f64> {
        let mut counts = vec![0.0; self.pair.len()];
        for &u in &self.index[range] {
            counts[u] += 1.0;
        }
        counts
    }

    fn row_sum(&self, u: usize, counts: &[f64]) -> f64 {
        self.pair[u].iter().zip(counts).map(|(s, c)| s * c).sum()
    }

    /// Copies of one text share a row, so they are summed as `count / row`;
    /// k copies of a lone heading then give exactly 1.
    fn cardinality(&self, range: std::ops::Range<usize>) -> f64 {
        let counts = self.counts(range);
        (0..counts.len()).filter(|&u| counts[u] > 0.0).map(|u| counts[u] / self.row_sum(u, &counts)).sum()
    }
}

/// Inverse of the summed similarity of heading `i` to every heading of `set`,
/// itself included.
pub fn soft_count(set: &HeadingSet, i: usize, embedder: &dyn EmbeddingProvider) -> Result<f64, EvalError> {
    if i >= set.len() {
        return Err(EvalError::IndexOutOfRange { index: i, len: set.len() });
    }
    let texts: Vec<&str> = set.iter().collect();
    let sim = Similarity::new(&texts, embedder)?;
    Ok(1.0 / sim.row_sum(sim.index[i], &sim.counts(0..texts.len())))
}

/// Sum of the soft counts. The empty set has cardinality 0.
pub fn soft_cardinality(set: &HeadingSet, embedder: &dyn EmbeddingProvider) -> Result<f64, EvalError> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let texts: Vec<&str> = set.iter().collect();
    Ok(Similarity::new(&texts, embedder)?.cardinality(0..texts.len()))
}

/// Soft recall of `truth` by `predicted`, with the intersection cardinality
/// taken as card(G) + card(P) - card(G ∪ P) over the concatenated multiset.
pub fn soft_heading_recall(truth: &HeadingSet, predicted: &HeadingSet, embedder: &dyn EmbeddingProvider) -> Result<f64, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyGroundTruth);
    }
    if predicted.is_empty() {
        return Ok(0.0);
    }
    let texts: Vec<&str> = truth.iter().chain(predicted.iter()).collect();
    let sim = Similarity::new(&texts, embedder)?;
    let g = truth.len();
    let card_g = sim.cardinality(0..g);
    let card_p = sim.cardinality(g..texts.len());
    let card_union = sim.cardinality(0..texts.len());
    Ok((card_g + card_p - card_union) / card_g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use storm_retrieval::TableEmbedder;

    fn stub() -> TableEmbedder {
        // a.b = 0.2 exactly; c and d are orthogonal to everything else.
        let s = (1.0f64 - 0.04).sqrt();
        TableEmbedder::new(4)
            .with("a", vec![1.0, 0.0, 0.0, 0.0])
            .with("b", vec![0.2, s, 0.0, 0.0])
            .with("c", vec![0.0, 0.0, 1.0, 0.0])
            .with("d", vec![0.0, 0.0, 0.0, 1.0])
            .with("neg", vec![-1.0, 0.0, 0.0, 0.0])
            .with("zero", vec![0.0; 4])
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() < 1e-12, "{a} != {b}");
    }

    #[test]
    fn count_examples() {
        let e = stub();
        close(soft_count(&HeadingSet::new(["a"]), 0, &e).unwrap(), 1.0);
        close(soft_count(&HeadingSet::new(["a", "a"]), 1, &e).unwrap(), 0.5);
        close(soft_count(&HeadingSet::new(["a", "b"]), 0, &e).unwrap(), 1.0 / 1.2);
        close(soft_count(&HeadingSet::new(["a", "b"]), 1, &e).unwrap(), 1.0 / 1.2);
        assert!(matches!(soft_count(&HeadingSet::new(["a"]), 1, &e), Err(EvalError::IndexOutOfRange { .. })));
    }

    #[test]
    fn cardinality_examples() {
        let e = stub();
        close(soft_cardinality(&HeadingSet::new(["a", "c", "d"]), &e).unwrap(), 3.0);
        close(soft_cardinality(&HeadingSet::new(["c", "c"]), &e).unwrap(), 1.0);
        close(soft_cardinality(&HeadingSet::new(["a", "b"]), &e).unwrap(), 2.0 / 1.2);
        close(soft_cardinality(&HeadingSet::default(), &e).unwrap(), 0.0);
    }

    #[test]
    fn recall_examples() {
        let e = stub();
        let g = HeadingSet::new(["a", "c"]);
        close(soft_heading_recall(&g, &g, &e).unwrap(), 1.0);
        close(soft_heading_recall(&g, &HeadingSet::new(["a"]), &e).unwrap(), 0.5);
        close(soft_heading_recall(&g, &HeadingSet::default(), &e).unwrap(), 0.0);
        assert!(matches!(soft_heading_recall(&HeadingSet::default(), &g, &e), Err(EvalError::EmptyGroundTruth)));
    }

    #[test]
    fn negative_similarity_counts_as_unrelated() {
        close(soft_cardinality(&HeadingSet::new(["a", "neg"]), &stub()).unwrap(), 2.0);
    }

    #[test]
    fn zero_vectors_are_errors() {
        let e = stub();
        assert!(matches!(soft_cardinality(&HeadingSet::new(["zero"]), &e), Err(EvalError::Embed(_))));
        assert!(matches!(soft_heading_recall(&HeadingSet::new(["a"]), &HeadingSet::new(["zero"]), &e), Err(EvalError::Embed(_))));
    }

    #[test]
    fn unknown_heading_is_an_error() {
        assert!(soft_cardinality(&HeadingSet::new(["missing"]), &stub()).is_err());
    }
}
