//! Wikipedia action API client.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;
use storm_http::{FairLimiter, HttpClient, HttpRequest};

pub const DEFAULT_API: &str = "https://en.wikipedia.org/w/api.php";

/// One table-of-contents entry; level 1 is a top-level section.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TocEntry {
    pub heading: String,
    pub level: usize,
}

pub struct WikiClient {
    http: Arc<dyn HttpClient>,
    api: String,
    limiter: FairLimiter,
}

impl WikiClient {
    pub fn new(http: Arc<dyn HttpClient>, api: impl Into<String>) -> Self {
        WikiClient { http, api: api.into(), limiter: FairLimiter::new(8) }
    }

    pub fn api(&self) -> &str {
        &self.api
    }

    /// GET `api` with `params` plus `format=json&formatversion=2`.
    pub fn api_url(&self, params: &[(&str, &str)]) -> String {
        let mut all: Vec<(&str, &str)> = params.to_vec();
        all.push(("format", "json"));
        all.push(("formatversion", "2"));
        url::Url::parse_with_params(&self.api, &all).map(|u| u.to_string()).unwrap_or_else(|_| self.api.clone())
    }

    /// Decoded JSON body of a successful call, `None` on any failure.
    pub fn get_json(&self, params: &[(&str, &str)]) -> Option<Value> {
        let url = self.api_url(params);
        let resp = {
            let _permit = self.limiter.acquire();
            self.http.send(&HttpRequest::get(&url))
        };
        match resp {
            Ok(r) if r.is_success() => match r.json::<Value>() {
                Ok(v) => Some(v),
                Err(e) => {
                    log::warn!("undecodable response from {url}: {e}");
                    None
                }
            },
            Ok(r) => {
                log::warn!("{url} answered {}", r.status);
                None
            }
            Err(e) => {
                log::warn!("{url}: {e}");
                None
            }
        }
    }

    /// Canonical title after normalization and at most one redirect hop,
    /// `None` if the page does not exist.
    pub fn resolve_title(&self, title: &str) -> Option<String> {
        let v = self.get_json(&[("action", "query"), ("titles", title), ("redirects", "1")])?;
        let page = v.pointer("/query/pages/0")?;
        if page.get("missing").is_some() || page.get("invalid").is_some() {
            return None;
        }
        page.get("title").and_then(Value::as_str).map(str::to_string)
    }

    /// Section headings of an existing page in document order.
    pub fn fetch_toc(&self, title: &str) -> Option<Vec<TocEntry>> {
        let resolved = self.resolve_title(title)?;
        let v = self.get_json(&[("action", "parse"), ("page", &resolved), ("prop", "sections")])?;
        let sections: Vec<RawSection> = serde_json::from_value(v.pointer("/parse/sections")?.clone()).ok()?;
        Some(
            sections
                .into_iter()
                .map(|s| TocEntry { heading: strip_tags(&s.line), level: s.toclevel.max(1) })
                .filter(|e| !e.heading.is_empty())
                .collect(),
        )
    }
}

#[derive(Deserialize)]
struct RawSection {
    toclevel: usize,
    line: String,
}

/// Drops inline HTML tags and decodes the few entities section lines use.
pub fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut in_tag = false;
    for c in s.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => in_tag = false,
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }
    out.replace("&amp;", "&").replace("&quot;", "\"").replace("&#39;", "'").replace("&lt;", "<").replace("&gt;", ">").trim().to_string()
}

/// A table of contents as `#` markup, one heading per line.
pub fn toc_markup(toc: &[TocEntry]) -> String {
    toc.iter().map(|e| format!("{} {}", "#".repeat(e.level), e.heading)).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use storm_http::FixtureClient;

    fn client(fixtures: FixtureClient) -> WikiClient {
        WikiClient::new(Arc::new(fixtures), "https://en.wikipedia.test/w/api.php")
    }

    fn with_page(f: FixtureClient, c: &WikiClient, asked: &str, query_body: &str, title: &str, sections: &str) -> FixtureClient {
        f.with_get(&c.api_url(&[("action", "query"), ("titles", asked), ("redirects", "1")]), 200, query_body).with_get(
            &c.api_url(&[("action", "parse"), ("page", title), ("prop", "sections")]),
            200,
            format!(r#"{{"parse":{{"title":"{title}","sections":{sections}}}}}"#),
        )
    }

    const SECTIONS: &str = r#"[{"toclevel":1,"level":"2","line":"History","number":"1"},{"toclevel":2,"level":"3","line":"<i>Early</i> years","number":"1.1"},{"toclevel":1,"level":"2","line":"Legacy &amp; impact","number":"2"}]"#;

    #[test]
    fn existing_page() {
        let probe = client(FixtureClient::new());
        let f = with_page(FixtureClient::new(), &probe, "Foo", r#"{"query":{"pages":[{"pageid":1,"ns":0,"title":"Foo"}]}}"#, "Foo", SECTIONS);
        let toc = client(f).fetch_toc("Foo").unwrap();
        assert_eq!(
            toc,
            vec![
                TocEntry { heading: "History".into(), level: 1 },
                TocEntry { heading: "Early years".into(), level: 2 },
                TocEntry { heading: "Legacy & impact".into(), level: 1 },
            ]
        );
        assert_eq!(toc_markup(&toc), "# History\n## Early years\n# Legacy & impact");
    }

    #[test]
    fn missing_page_is_absent() {
        let probe = client(FixtureClient::new());
        let f = FixtureClient::new().with_get(
            &probe.api_url(&[("action", "query"), ("titles", "Nope"), ("redirects", "1")]),
            200,
            r#"{"query":{"pages":[{"ns":0,"title":"Nope","missing":true}]}}"#,
        );
        assert!(client(f).fetch_toc("Nope").is_none());
    }

    #[test]
    fn redirect_followed() {
        let probe = client(FixtureClient::new());
        let q = r#"{"query":{"redirects":[{"from":"Old","to":"New"}],"pages":[{"pageid":2,"ns":0,"title":"New"}]}}"#;
        let f = with_page(FixtureClient::new(), &probe, "Old", q, "New", SECTIONS);
        assert_eq!(client(f).fetch_toc("Old").unwrap().len(), 3);
    }

    #[test]
    fn transport_errors_degrade() {
        assert!(client(FixtureClient::unreachable()).fetch_toc("Foo").is_none());
    }
}
