use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use storm_core::url_norm::host_of;
use storm_core::SourceDocument;

const DEFAULT_LIST: &str = include_str!("default_blocklist.txt");

/// Rule-based source filter: blocked domains (suffix match on the host),
/// blocked url globs, and optionally HTTPS-only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustPolicy {
    pub blocked_domains: BTreeSet<String>,
    pub blocked_url_patterns: Vec<String>,
    pub require_https: bool,
}

impl Default for TrustPolicy {
    fn default() -> Self {
        TrustPolicy::parse(DEFAULT_LIST)
    }
}

impl TrustPolicy {
    /// Allows everything.
    pub fn permissive() -> Self {
        TrustPolicy { blocked_domains: BTreeSet::new(), blocked_url_patterns: Vec::new(), require_https: false }
    }

    /// Reads the plain-text list format of the default list.
    pub fn parse(text: &str) -> Self {
        let mut policy = TrustPolicy::permissive();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line == "require_https" {
                policy.require_https = true;
            } else if let Some(p) = line.strip_prefix("pattern:") {
                policy.blocked_url_patterns.push(p.trim().to_string());
            } else {
                policy.blocked_domains.insert(line.trim_start_matches("*.").trim_start_matches('.').to_ascii_lowercase());
            }
        }
        policy
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        std::fs::read_to_string(path).map(|t| Self::parse(&t)).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn allows(&self, url: &str) -> bool {
        let Some(host) = host_of(url) else { return false };
        if self.require_https && !url.trim().to_ascii_lowercase().starts_with("https://") {
            return false;
        }
        let blocked_host = self
            .blocked_domains
            .iter()
            .any(|d| host == *d || (host.len() > d.len() && host.ends_with(d.as_str()) && host.as_bytes()[host.len() - d.len() - 1] == b'.'));
        !blocked_host && !self.blocked_url_patterns.iter().any(|p| glob_match(p, url.trim()))
    }
}

/// Keeps allowed documents with at least one snippet, marking them trusted.
/// Order is preserved.
pub fn filter_trusted(docs: Vec<SourceDocument>, policy: &TrustPolicy) -> Vec<SourceDocument> {
    docs.into_iter()
        .filter_map(|mut d| {
            let ok = policy.allows(&d.url) && d.snippets.iter().any(|s| !s.trim().is_empty());
            d.trusted = ok;
            ok.then_some(d)
        })
        .collect()
}

/// `*` matches any run of characters, everything else literally.
fn glob_match(pattern: &str, text: &str) -> bool {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == text;
    }
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !text.starts_with(first) || text.len() < first.len() + last.len() || !text.ends_with(last) {
        return false;
    }
    let mut rest = &text[first.len()..text.len() - last.len()];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;
    use proptest::prelude::*;

    fn doc(url: &str) -> SourceDocument {
        SourceDocument { url: url.into(), title: "t".into(), snippets: vec!["s".into()], retrieved_at: Utc::now(), trusted: false }
    }

    #[test]
    fn default_blocks_user_generated() {
        let p = TrustPolicy::default();
        let out = filter_trusted(vec![doc("https://example-blog.blogspot.com/2023/x.html"), doc("https://www.nature.com/articles/1")], &p);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].url, "https://www.nature.com/articles/1");
        assert!(out[0].trusted);
        assert!(filter_trusted(vec![], &p).is_empty());
        assert!(!p.allows("https://www.reddit.com/r/x"));
        assert!(!p.allows("https://news.example.com/forum/thread/1"));
        assert!(p.allows("https://notreddit.com/a"));
    }

    #[test]
    fn parse_list() {
        let p = TrustPolicy::parse("# c\nbad.org  # trailing\npattern: *tracker*\nrequire_https\n");
        assert!(p.require_https);
        assert!(!p.allows("http://good.org"));
        assert!(p.allows("https://good.org"));
        assert!(!p.allows("https://sub.bad.org"));
        assert!(!p.allows("https://good.org/tracker?id=1"));
    }

    #[test]
    fn drops_empty_snippet_docs() {
        let mut d = doc("https://a.org");
        d.snippets = vec![" ".into()];
        assert!(filter_trusted(vec![d], &TrustPolicy::permissive()).is_empty());
    }

    #[test]
    fn globs() {
        assert!(glob_match("a*c", "abbbc"));
        assert!(glob_match("*", ""));
        assert!(!glob_match("a*b*a", "aab"));
        assert!(!glob_match("a*a", "a"));
        assert!(glob_match("a*b*a", "abba"));
        assert!(!glob_match("abc", "abcd"));
    }

    proptest! {
        #[test]
        fn filter_is_idempotent(hosts in proptest::collection::vec("(reddit\\.com|nature\\.com|a\\.blogspot\\.com|x\\.org|[a-z]{1,6}\\.(com|org))", 0..12)) {
            let docs: Vec<_> = hosts.iter().map(|h| doc(&format!("https://{h}/p"))).collect();
            let policy = TrustPolicy::default();
            let once = filter_trusted(docs, &policy);
            let twice = filter_trusted(once.clone(), &policy);
            prop_assert_eq!(once, twice);
        }
    }
}
