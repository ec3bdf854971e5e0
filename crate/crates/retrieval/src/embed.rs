use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Deserialize;
use serde_json::json;
use storm_http::{HttpClient, HttpRequest};

pub const EMBED_KEY_VAR: &str = "STORM_EMBED_KEY";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("cosine similarity of a zero vector")]
    ZeroVector,
    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("embedding backend failed: {0}")]
    Backend(String),
    #[error("no embedding for `{0}`")]
    Unknown(String),
}

/// Text to fixed-dimension vectors. The same text always yields the same
/// vector for the lifetime of a provider.
pub trait EmbeddingProvider: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

impl<T: EmbeddingProvider + ?Sized> EmbeddingProvider for Arc<T> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        (**self).embed(text)
    }
    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        (**self).embed_batch(texts)
    }
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64, EmbedError> {
    if a.len() != b.len() {
        return Err(EmbedError::DimensionMismatch(a.len(), b.len()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Lowercased alphanumeric word tokens.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty()).map(str::to_lowercase).collect()
}

/// Deterministic bag-of-words feature hashing. Components are non-negative
/// counts, so similarities fall in [0, 1] and texts with no shared word
/// score 0 unless their words collide.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        HashEmbedder { dimension: dimension.max(1) }
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(1024)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl EmbeddingProvider for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        let mut v = vec![0.0; self.dimension];
        for w in word_tokens(text) {
            v[(fnv1a(&w) % self.dimension as u64) as usize] += 1.0;
        }
        Ok(v)
    }
}

/// Fixed text to vector table, for tests that need exact similarities.
#[derive(Debug, Clone, Default)]
pub struct TableEmbedder {
    dimension: usize,
    table: HashMap<String, Vec<f64>>,
}

impl TableEmbedder {
    pub fn new(dimension: usize) -> Self {
        TableEmbedder { dimension, table: HashMap::new() }
    }

    pub fn with(mut self, text: &str, vector: Vec<f64>) -> Self {
        assert_eq!(vector.len(), self.dimension, "table vector has wrong dimension");
        self.table.insert(text.to_string(), vector);
        self
    }
}

impl EmbeddingProvider for TableEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        self.table.get(text).cloned().ok_or_else(|| EmbedError::Unknown(text.into()))
    }
}

/// OpenAI-compatible `POST {base}/embeddings`, memoized per text.
pub struct RemoteEmbedder {
    http: Arc<dyn HttpClient>,
    base_url: String,
    model: String,
    api_key: Option<String>,
    dimension: usize,
    memo: Mutex<HashMap<String, Vec<f64>>>,
}

impl RemoteEmbedder {
    pub fn new(http: Arc<dyn HttpClient>, base_url: &str, model: &str, dimension: usize, api_key: Option<String>) -> Self {
        RemoteEmbedder {
            http,
            base_url: base_url.trim_end_matches('/').to_string(),
            model: model.into(),
            api_key,
            dimension,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn request(&self, texts: &[&str]) -> HttpRequest {
        let mut req = HttpRequest::post_json(format!("{}/embeddings", self.base_url), &json!({"model": self.model, "input": texts}));
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {k}"));
        }
        req
    }
}

#[derive(Deserialize)]
struct EmbeddingsBody {
    data: Vec<EmbeddingItem>,
}

#[derive(Deserialize)]
struct EmbeddingItem {
    embedding: Vec<f64>,
}

impl EmbeddingProvider for RemoteEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, EmbedError> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        let missing: Vec<&str> = {
            let memo = self.memo.lock().expect("embed memo poisoned");
            let mut m: Vec<&str> = texts.iter().copied().filter(|t| !memo.contains_key(*t)).collect();
            m.sort_unstable();
            m.dedup();
            m
        };
        if !missing.is_empty() {
            let resp = self.http.send(&self.request(&missing)).map_err(|e| EmbedError::Backend(e.to_string()))?;
            if !resp.is_success() {
                return Err(EmbedError::Backend(format!("status {}: {}", resp.status, resp.body)));
            }
            let body: EmbeddingsBody = resp.json().map_err(|e| EmbedError::Backend(e.to_string()))?;
            if body.data.len() != missing.len() {
                return Err(EmbedError::Backend(format!("asked for {} embeddings, got {}", missing.len(), body.data.len())));
            }
            let mut memo = self.memo.lock().expect("embed memo poisoned");
            for (t, item) in missing.iter().zip(body.data) {
                if item.embedding.len() != self.dimension {
                    return Err(EmbedError::DimensionMismatch(item.embedding.len(), self.dimension));
                }
                memo.insert(t.to_string(), item.embedding);
            }
        }
        let memo = self.memo.lock().expect("embed memo poisoned");
        Ok(texts.iter().map(|t| memo[*t].clone()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use storm_http::{FixtureClient, HttpResponse};

    #[test]
    fn cosine_examples() {
        let v = [0.3, -2.0, 5.0];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine_similarity(&[1.0, 0.0], &[1.0, 1.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 1.0]), Err(EmbedError::ZeroVector));
        assert!(matches!(cosine_similarity(&[1.0], &[1.0, 1.0]), Err(EmbedError::DimensionMismatch(1, 2))));
    }

    #[test]
    fn hash_embedder_is_stable() {
        let e = HashEmbedder::new(64);
        assert_eq!(e.embed("Early life").unwrap(), e.embed("early LIFE!").unwrap());
        assert_eq!(e.embed("x y").unwrap().len(), 64);
        assert!(e.embed("").unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn remote_embedder_memoizes() {
        let probe = RemoteEmbedder::new(Arc::new(FixtureClient::new()), "https://e.test/v1", "m", 2, None);
        let http = Arc::new(FixtureClient::new().with(
            probe.request(&["a", "b"]),
            HttpResponse::ok(r#"{"data":[{"embedding":[1.0,0.0]},{"embedding":[0.0,1.0]}]}"#),
        ));
        let e = RemoteEmbedder::new(http.clone(), "https://e.test/v1", "m", 2, None);
        assert_eq!(e.embed_batch(&["b", "a", "a"]).unwrap(), vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(e.embed("a").unwrap(), vec![1.0, 0.0]);
        assert_eq!(http.request_count(), 1);
    }

    proptest! {
        #[test]
        fn cosine_is_symmetric_and_bounded(a in proptest::collection::vec(-10.0f64..10.0, 4), b in proptest::collection::vec(-10.0f64..10.0, 4)) {
            match (cosine_similarity(&a, &b), cosine_similarity(&b, &a)) {
                (Ok(x), Ok(y)) => {
                    prop_assert!((x - y).abs() < 1e-12);
                    prop_assert!((-1.0..=1.0).contains(&x));
                }
                (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
                _ => prop_assert!(false, "asymmetric failure"),
            }
        }
    }
}
