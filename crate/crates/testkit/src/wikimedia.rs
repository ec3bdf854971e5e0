//! Canned Wikimedia responses for curation: two months of most-edited
//! pages covering every filter outcome.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use serde_json::{json, Value};
use storm_freshwiki::{build_dataset, BuildOptions, BuildReport, Endpoints, FreshWikiError, WikimediaClient, YearMonth};
use storm_http::{CacheMode, CachingClient, DiskCache, FixtureClient, HttpClient, HttpRequest, HttpResponse};
use storm_retrieval::WikiClient;

pub const CACHE_DIR: &str = "wikimedia";
pub const WORD_CAP: usize = 3000;

pub fn today() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 10, 15).unwrap()
}

/// Months with data, a month the API has nothing for, and a future month.
pub fn months() -> Vec<YearMonth> {
    ["2022-02", "2022-03", "2022-04", "2031-01"].iter().map(|m| m.parse().unwrap()).collect()
}

enum Quality {
    Class(&'static str),
    ServerError,
}

struct Page {
    title: &'static str,
    /// Title the page redirects to, if any.
    target: Option<&'static str>,
    quality: Quality,
    /// (level, heading, paragraphs of body)
    sections: Vec<(usize, &'static str, usize)>,
    lead_sentences: usize,
    refs: usize,
    table: bool,
    missing: bool,
    snapshot_fails: bool,
}

fn page(title: &'static str, quality: &'static str, sections: Vec<(usize, &'static str, usize)>) -> Page {
    Page { title, target: None, quality: Quality::Class(quality), sections, lead_sentences: 3, refs: 4, table: false, missing: false, snapshot_fails: false }
}

fn appendix() -> Vec<(usize, &'static str, usize)> {
    vec![(1, "See also", 1), (1, "References", 0), (1, "External links", 1)]
}

fn with_appendix(mut s: Vec<(usize, &'static str, usize)>) -> Vec<(usize, &'static str, usize)> {
    s.extend(appendix());
    s
}

fn pages() -> Vec<Page> {
    vec![
        Page {
            table: true,
            refs: 12,
            ..page("Aurora Tidal Barrage", "B", with_appendix(vec![(1, "History", 2), (2, "Royal commission", 1), (1, "Design", 2), (1, "Operation", 1), (1, "Ecology", 1)]))
        },
        Page { refs: 30, ..page("Harbor Bridge", "GA", with_appendix(vec![(1, "Background", 1), (1, "Construction", 2), (2, "Caissons", 1), (3, "Failure of caisson 4", 1), (1, "Reception", 1)])) },
        page("List of tidal power stations", "FA", vec![(1, "Operational", 1), (1, "Proposed", 1)]),
        page("Quiet Village", "Stub", vec![(1, "Geography", 1)]),
        Page { lead_sentences: 6, ..page("Flat Article", "B", appendix()) },
        page("Long Chronicle", "FA", with_appendix(vec![(1, "Origins", 60), (1, "Reign", 60), (1, "Aftermath", 60)])),
        Page { quality: Quality::ServerError, ..page("Broken Score", "B", vec![(1, "Overview", 1)]) },
        Page { missing: true, ..page("Missing Page", "B", vec![]) },
        Page { target: Some("Metro Line 5"), ..page("Line 5 (metro)", "B", with_appendix(vec![(1, "Route", 2), (1, "Stations", 1), (1, "Rolling stock", 1)])) },
        Page { refs: 80, ..page("Comet Ordell", "FA", with_appendix(vec![(1, "Discovery", 1), (1, "Orbit", 2), (1, "Observations", 1), (2, "Perihelion 2022", 1)])) },
        page("Start Class Topic", "Start", vec![(1, "Overview", 1)]),
        Page { snapshot_fails: true, ..page("Snapshot Failure", "GA", vec![(1, "Overview", 1)]) },
        page("Festival Season", "C", vec![(1, "Lineup", 1)]),
    ]
}

/// (title, edits) per month with data.
fn top(month: &str) -> Vec<(&'static str, u64)> {
    match month {
        "2022-02" => vec![
            ("Aurora Tidal Barrage", 812),
            ("Harbor Bridge", 640),
            ("List of tidal power stations", 602),
            ("Quiet Village", 577),
            ("Flat Article", 540),
            ("Long Chronicle", 515),
            ("Broken Score", 498),
            ("Missing Page", 470),
            ("Line 5 (metro)", 455),
            ("Comet Ordell", 430),
            ("Start Class Topic", 401),
            ("Snapshot Failure", 388),
        ],
        "2022-03" => vec![("Comet Ordell", 1204), ("Festival Season", 733), ("Harbor Bridge", 210)],
        _ => Vec::new(),
    }
}

fn canonical(p: &Page) -> &'static str {
    p.target.unwrap_or(p.title)
}

fn revision_id(i: usize) -> u64 {
    1_100_000 + i as u64 * 37
}

fn sentence(title: &str, heading: &str, n: usize) -> String {
    format!("Record {n} on the {} of {title} is kept in the archive.", heading.to_lowercase())
}

fn extract(p: &Page) -> String {
    let title = canonical(p);
    let mut out: Vec<String> = vec![(0..p.lead_sentences).map(|n| sentence(title, "overview", n)).collect::<Vec<_>>().join(" ")];
    for (level, heading, paras) in &p.sections {
        out.push(String::new());
        out.push(format!("{eq} {heading} {eq}", eq = "=".repeat(level + 1)));
        for k in 0..*paras {
            out.push((0..4).map(|n| sentence(title, heading, k * 4 + n)).collect::<Vec<_>>().join(" "));
        }
        if p.table && *heading == "Design" {
            out.push("{| class=\"wikitable\"\n|-\n! Unit !! Output\n|-\n| 1 || 40 MW\n|}".into());
        }
    }
    out.join("\n")
}

fn wikitext(p: &Page) -> String {
    let mut out = format!("'''{}''' is a subject.", canonical(p));
    for r in 0..p.refs {
        out.push_str(&format!(" Claim {r}.<ref name=\"r{r}\">Source {r}</ref>"));
    }
    out.push_str(" Repeated.<ref name=\"r0\"/>\n==References==\n<references/>");
    out
}

fn wiki_get(wiki: &WikiClient, params: &[(&str, &str)]) -> HttpRequest {
    HttpRequest::get(wiki.api_url(params))
}

/// Every request curation of [`months`] will make, with its response.
pub fn responses() -> Vec<(HttpRequest, HttpResponse)> {
    let endpoints = Endpoints::default();
    let wiki = WikiClient::new(Arc::new(FixtureClient::new()), endpoints.action.clone());
    let mut out = Vec::new();
    for m in months() {
        let key = m.to_string();
        let url = endpoints.top_edited_url(m);
        if key == "2022-04" {
            out.push((HttpRequest::get(url), HttpResponse::new(404, r#"{"type":"https://mediawiki.org/wiki/HyperSwitch/errors/not_found","title":"Not found."}"#)));
            continue;
        }
        let entries = top(&key);
        if entries.is_empty() {
            continue;
        }
        let top: Vec<Value> = entries.iter().enumerate().map(|(i, (t, e))| json!({"page_title": t.replace(' ', "_"), "edits": e, "rank": i + 1})).collect();
        let body = json!({"items": [{"project": "en.wikipedia", "editor-type": "all-editor-types", "page-type": "content", "granularity": "monthly",
            "results": [{"timestamp": format!("{key}-01T00:00:00.000Z"), "top": top}]}]});
        out.push((HttpRequest::get(url), HttpResponse::ok(body.to_string())));
    }
    for (i, p) in pages().iter().enumerate() {
        let rev = revision_id(i);
        let title = canonical(p);
        let pages_json = if p.missing {
            json!([{"ns": 0, "title": p.title, "missing": true}])
        } else {
            json!([{"pageid": 5000 + i, "ns": 0, "title": title, "revisions": [{"revid": rev, "parentid": rev - 1, "timestamp": "2023-09-30T18:04:11Z"}]}])
        };
        let mut query = json!({"pages": pages_json});
        if let Some(t) = p.target {
            query["redirects"] = json!([{"from": p.title, "to": t}]);
        }
        out.push((
            wiki_get(&wiki, &[("action", "query"), ("prop", "revisions"), ("titles", p.title), ("rvprop", "ids|timestamp"), ("redirects", "1")]),
            HttpResponse::ok(json!({"batchcomplete": true, "query": query}).to_string()),
        ));
        if p.missing {
            continue;
        }
        let quality = match p.quality {
            Quality::Class(c) => HttpResponse::ok(
                json!({"enwiki": {"models": {"articlequality": {"version": "0.9.2"}},
                    "scores": {rev.to_string(): {"articlequality": {"score": {"prediction": c, "probability": {c: 0.61}}}}}}})
                .to_string(),
            ),
            Quality::ServerError => HttpResponse::new(500, "upstream connect error"),
        };
        out.push((endpoints.quality_request(rev), quality));
        let oldid = rev.to_string();
        let parse_req = wiki_get(&wiki, &[("action", "parse"), ("oldid", &oldid), ("prop", "sections|wikitext")]);
        if p.snapshot_fails {
            out.push((parse_req, HttpResponse::ok(json!({"error": {"code": "nosuchrevid", "info": "There is no revision"}}).to_string())));
            continue;
        }
        let sections: Vec<Value> = p
            .sections
            .iter()
            .enumerate()
            .map(|(k, (level, heading, _))| json!({"toclevel": level, "level": (level + 1).to_string(), "line": heading, "number": (k + 1).to_string(), "index": (k + 1).to_string()}))
            .collect();
        out.push((parse_req, HttpResponse::ok(json!({"parse": {"title": title, "pageid": 5000 + i, "revid": rev, "sections": sections, "wikitext": wikitext(p)}}).to_string())));
        out.push((
            wiki_get(&wiki, &[("action", "query"), ("prop", "extracts"), ("explaintext", "1"), ("exsectionformat", "wikitext"), ("titles", title), ("redirects", "1")]),
            HttpResponse::ok(json!({"batchcomplete": true, "query": {"pages": [{"pageid": 5000 + i, "ns": 0, "title": title, "extract": extract(p)}]}}).to_string()),
        ));
    }
    out
}

pub fn fixture_client() -> FixtureClient {
    responses().into_iter().fold(FixtureClient::new(), |c, (req, resp)| c.with(req, resp))
}

pub fn cache_dir() -> PathBuf {
    crate::fixtures_dir().join(CACHE_DIR)
}

pub fn client(http: Arc<dyn HttpClient>) -> WikimediaClient {
    WikimediaClient::new(http, Endpoints::default(), today())
}

/// Offline client over the recorded cache in `dir`.
pub fn replay_client(dir: &Path) -> WikimediaClient {
    client(Arc::new(CachingClient::new(FixtureClient::unreachable(), DiskCache::new(dir), CacheMode::Offline)))
}

/// Curates the fixture months through a cache in `dir`, filling it with
/// exactly the requests made, once capped and once uncapped.
pub fn record(dir: &Path) -> Result<(), FreshWikiError> {
    let _ = std::fs::remove_dir_all(dir);
    let http = Arc::new(CachingClient::new(fixture_client(), DiskCache::new(dir), CacheMode::ReadWrite));
    let c = client(http);
    for max_words in [None, Some(WORD_CAP)] {
        build(&c, max_words)?;
    }
    Ok(())
}

pub fn build(client: &WikimediaClient, max_words: Option<usize>) -> Result<BuildReport, FreshWikiError> {
    build_dataset(client, &months(), &BuildOptions { max_words, ..BuildOptions::default() })
}
