//! Trusted sources and the deduplicated reference store articles cite into.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::url_norm::normalize_url;

/// Citation id of a stored reference. Ids start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RefId(pub u32);

impl fmt::Display for RefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub url: String,
    pub title: String,
    pub snippets: Vec<String>,
    pub retrieved_at: DateTime<Utc>,
    #[serde(default)]
    pub trusted: bool,
}

impl SourceDocument {
    /// All snippets joined, the passage a citation to this document points at.
    pub fn passage(&self) -> String {
        self.snippets.join("\n")
    }
}

/// Position of a search result within a run: which conversation asked, in
/// which round, and where the hit ranked among that round's results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrderingKey {
    pub perspective: u32,
    pub round: u32,
    pub rank: u32,
}

impl OrderingKey {
    pub fn new(perspective: u32, round: u32, rank: u32) -> Self {
        OrderingKey { perspective, round, rank }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InsertError {
    #[error("source `{0}` is not trusted")]
    Untrusted(String),
    #[error("source `{0}` is the excluded ground-truth page")]
    Excluded(String),
    #[error("source `{0}` has no usable url")]
    InvalidUrl(String),
    #[error("source `{0}` has no snippets")]
    NoSnippets(String),
}

/// Ordered, url-deduplicated set of trusted documents.
///
/// Ids are handed out contiguously from 1 in insertion order. Inserting a
/// document whose normalized url is already present returns the existing id
/// and folds any new snippets into the stored entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "StoreRepr", into = "StoreRepr")]
pub struct ReferenceStore {
    entries: BTreeMap<RefId, SourceDocument>,
    by_url: HashMap<String, RefId>,
    excluded_url: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct StoreRepr {
    entries: BTreeMap<RefId, SourceDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    excluded_url: Option<String>,
}

impl From<StoreRepr> for ReferenceStore {
    fn from(repr: StoreRepr) -> Self {
        let mut store = ReferenceStore::with_exclusion(repr.excluded_url);
        for (_, doc) in repr.entries {
            // Ids are reassigned contiguously; a well-formed file keeps them.
            let _ = store.insert(doc);
        }
        store
    }
}

impl From<ReferenceStore> for StoreRepr {
    fn from(store: ReferenceStore) -> Self {
        StoreRepr { entries: store.entries, excluded_url: store.excluded_url }
    }
}

impl ReferenceStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store that refuses the given url (normally the topic's ground truth page).
    pub fn with_exclusion(url: Option<String>) -> Self {
        ReferenceStore { excluded_url: url.and_then(|u| normalize_url(&u).ok()), ..Self::default() }
    }

    pub fn excluded_url(&self) -> Option<&str> {
        self.excluded_url.as_deref()
    }

    pub fn insert(&mut self, doc: SourceDocument) -> Result<RefId, InsertError> {
        let key = normalize_url(&doc.url).map_err(|_| InsertError::InvalidUrl(doc.url.clone()))?;
        if self.excluded_url.as_deref() == Some(key.as_str()) {
            return Err(InsertError::Excluded(doc.url));
        }
        if !doc.trusted {
            return Err(InsertError::Untrusted(doc.url));
        }
        if doc.snippets.iter().all(|s| s.trim().is_empty()) {
            return Err(InsertError::NoSnippets(doc.url));
        }
        if let Some(&id) = self.by_url.get(&key) {
            let entry = self.entries.get_mut(&id).expect("index and entries agree");
            for s in doc.snippets {
                if !s.trim().is_empty() && !entry.snippets.contains(&s) {
                    entry.snippets.push(s);
                }
            }
            return Ok(id);
        }
        let id = RefId(self.entries.len() as u32 + 1);
        let mut doc = doc;
        doc.snippets.retain(|s| !s.trim().is_empty());
        self.by_url.insert(key, id);
        self.entries.insert(id, doc);
        Ok(id)
    }

    pub fn get(&self, id: RefId) -> Option<&SourceDocument> {
        self.entries.get(&id)
    }

    pub fn contains(&self, id: RefId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn id_for_url(&self, url: &str) -> Option<RefId> {
        normalize_url(url).ok().and_then(|k| self.by_url.get(&k).copied())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (RefId, &SourceDocument)> {
        self.entries.iter().map(|(&id, d)| (id, d))
    }

    pub fn ids(&self) -> impl Iterator<Item = RefId> + '_ {
        self.entries.keys().copied()
    }

    /// Inserts every entry of `other` in its id order and returns the
    /// mapping from `other`'s ids to ids in `self`.
    pub fn absorb(&mut self, other: &ReferenceStore) -> BTreeMap<RefId, RefId> {
        let mut remap = BTreeMap::new();
        for (id, doc) in other.iter() {
            if let Ok(new_id) = self.insert(doc.clone()) {
                remap.insert(id, new_id);
            }
        }
        remap
    }
}

/// Collects documents from concurrent producers and materializes them into a
/// [`ReferenceStore`] in ordering-key order, so the resulting ids never
/// depend on which task finished first. Keys must be unique per document
/// submission for the order to be total.
#[derive(Debug, Default)]
pub struct ReferenceMerger {
    pending: Mutex<Vec<(OrderingKey, SourceDocument)>>,
}

impl ReferenceMerger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn submit(&self, key: OrderingKey, doc: SourceDocument) {
        self.pending.lock().expect("merger lock poisoned").push((key, doc));
    }

    pub fn finish(self, excluded_url: Option<String>) -> ReferenceStore {
        let mut pending = self.pending.into_inner().expect("merger lock poisoned");
        pending.sort_by_key(|(k, _)| *k);
        let mut store = ReferenceStore::with_exclusion(excluded_url);
        for (_, doc) in pending {
            let _ = store.insert(doc);
        }
        store
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn doc(url: &str, snippet: &str) -> SourceDocument {
        SourceDocument {
            url: url.into(),
            title: format!("title of {url}"),
            snippets: vec![snippet.into()],
            retrieved_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            trusted: true,
        }
    }

    #[test]
    fn ids_are_contiguous_and_idempotent() {
        let mut s = ReferenceStore::new();
        assert_eq!(s.insert(doc("https://a.org/x", "one")), Ok(RefId(1)));
        assert_eq!(s.insert(doc("https://b.org/y", "two")), Ok(RefId(2)));
        assert_eq!(s.insert(doc("HTTPS://A.org/x/#top", "three")), Ok(RefId(1)));
        assert_eq!(s.len(), 2);
        assert_eq!(s.get(RefId(1)).unwrap().snippets, vec!["one", "three"]);
        assert_eq!(s.id_for_url("https://b.org/y/"), Some(RefId(2)));
    }

    #[test]
    fn rejects_untrusted_excluded_and_empty() {
        let mut s = ReferenceStore::with_exclusion(Some("https://en.wikipedia.org/wiki/LK-99".into()));
        let mut d = doc("https://c.org", "x");
        d.trusted = false;
        assert!(matches!(s.insert(d), Err(InsertError::Untrusted(_))));
        assert!(matches!(
            s.insert(doc("https://en.wikipedia.org/wiki/LK-99#History", "x")),
            Err(InsertError::Excluded(_))
        ));
        assert!(matches!(s.insert(doc("https://d.org", "  ")), Err(InsertError::NoSnippets(_))));
        assert!(matches!(s.insert(doc("not a url", "x")), Err(InsertError::InvalidUrl(_))));
        assert!(s.is_empty());
    }

    #[test]
    fn json_round_trip_keeps_ids() {
        let mut s = ReferenceStore::with_exclusion(Some("https://x.org/gt".into()));
        s.insert(doc("https://a.org", "1")).unwrap();
        s.insert(doc("https://b.org", "2")).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"entries\":{\"1\":"));
        let back: ReferenceStore = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.id_for_url("https://b.org"), Some(RefId(2)));
    }

    #[test]
    fn merger_order_is_key_order() {
        let a = ReferenceMerger::new();
        a.submit(OrderingKey::new(1, 1, 0), doc("https://p1.org", "x"));
        a.submit(OrderingKey::new(0, 2, 0), doc("https://p0r2.org", "x"));
        a.submit(OrderingKey::new(0, 1, 1), doc("https://p0r1b.org", "x"));
        a.submit(OrderingKey::new(0, 1, 0), doc("https://p0r1a.org", "x"));
        let store = a.finish(None);
        let urls: Vec<_> = store.iter().map(|(_, d)| d.url.as_str()).collect();
        assert_eq!(urls, vec!["https://p0r1a.org", "https://p0r1b.org", "https://p0r2.org", "https://p1.org"]);
    }

    #[test]
    fn merger_is_schedule_independent() {
        let keys: Vec<_> = (0..4u32).flat_map(|p| (1..4u32).map(move |r| (p, r))).collect();
        let run = |reverse: bool| {
            let m = ReferenceMerger::new();
            std::thread::scope(|scope| {
                let mut order = keys.clone();
                if reverse {
                    order.reverse();
                }
                for (p, r) in order {
                    let m = &m;
                    scope.spawn(move || {
                        m.submit(OrderingKey::new(p, r, 0), doc(&format!("https://s{}.org", (p * r) % 5), "x"));
                    });
                }
            });
            m.finish(None)
        };
        assert_eq!(run(false), run(true));
    }

    #[test]
    fn absorb_remaps() {
        let mut global = ReferenceStore::new();
        global.insert(doc("https://a.org", "1")).unwrap();
        let mut local = ReferenceStore::new();
        local.insert(doc("https://b.org", "2")).unwrap();
        local.insert(doc("https://a.org", "3")).unwrap();
        let remap = global.absorb(&local);
        assert_eq!(remap[&RefId(1)], RefId(2));
        assert_eq!(remap[&RefId(2)], RefId(1));
    }
}
