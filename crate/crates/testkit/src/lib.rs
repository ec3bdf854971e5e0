//! Offline stand-ins for every external service.
//!
//! [`SimModel`] answers prompts from a small fictional world, [`CorpusSearch`]
//! searches that world's pages and [`wiki_fixtures`] serves tables of
//! contents for related pages. [`sim_services`] wires them into pipeline
//! [`Services`]. Runs against the simulation can be recorded with
//! [`record_fixtures`] and replayed with [`replay_services`].

pub mod gen;
pub mod oracle;
mod sim;
pub mod wikimedia;
mod slots;
pub mod world;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use storm_core::{RunDir, RunMode, RunRecord, Topic};
use storm_http::{FixtureClient, RetryPolicy};
use storm_lm::{ChatBackend, LmGateway, ModelParams, ReplayBackend, ReplayEntry};
use storm_pipeline::{run, PrewritingConfig, Services, WritingConfig};
use storm_retrieval::{Clock, HashEmbedder, RecordingSearch, ReplaySearch, SearchBackend, SearchError, SearchHit, Searcher, TrustPolicy, WikiClient};

pub use sim::SimModel;
pub use slots::extract as extract_slots;

pub const WIKI_API: &str = "https://en.wikipedia.test/w/api.php";
pub const LM_FIXTURE: &str = "lm.json";
pub const SEARCH_FIXTURE: &str = "search.json";

pub fn topic() -> Topic {
    Topic::new(world::TOPIC).expect("valid topic").with_exclusion(world::GROUND_TRUTH_URL)
}

pub fn fixed_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()
}

pub fn fixed_clock() -> Clock {
    Arc::new(fixed_time)
}

/// Search over the world's pages.
pub struct CorpusSearch {
    pages: Vec<world::Page>,
}

impl Default for CorpusSearch {
    fn default() -> Self {
        CorpusSearch { pages: world::pages() }
    }
}

impl SearchBackend for CorpusSearch {
    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        Ok(world::search(&self.pages, query, k))
    }
}

/// Wiki API responses: one related page with a table of contents, one
/// missing page, and the topic's own page.
pub fn wiki_fixtures() -> FixtureClient {
    let probe = WikiClient::new(Arc::new(FixtureClient::new()), WIKI_API);
    let query = |t: &str| probe.api_url(&[("action", "query"), ("titles", t), ("redirects", "1")]);
    let parse = |t: &str| probe.api_url(&[("action", "parse"), ("page", t), ("prop", "sections")]);
    let sections = serde_json::json!({"parse": {"sections": [
        {"line": "History", "toclevel": 1},
        {"line": "Design and <i>operation</i>", "toclevel": 1},
        {"line": "Turbines", "toclevel": 2},
        {"line": "Environmental impact", "toclevel": 1},
        {"line": "See also", "toclevel": 1},
    ]}});
    let mut out = FixtureClient::new();
    for (t, toc) in [("Rance Tidal Power Station", Some(&sections)), ("Aurora Tidal Barrage", Some(&sections)), ("Severn Barrage", None)] {
        let page = match toc {
            Some(_) => serde_json::json!({"query": {"pages": [{"title": t}]}}),
            None => serde_json::json!({"query": {"pages": [{"title": t, "missing": true}]}}),
        };
        out = out.with_get(&query(t), 200, page.to_string());
        if let Some(s) = toc {
            out = out.with_get(&parse(t), 200, s.to_string());
        }
    }
    out
}

pub fn services(lm: Arc<dyn ChatBackend>, search: Arc<dyn SearchBackend>) -> Services {
    let gateway = LmGateway::single(lm, ModelParams::new("sim")).with_retry(RetryPolicy::immediate(2));
    Services {
        lm: Arc::new(gateway),
        searcher: Arc::new(Searcher::new(search).with_retry(RetryPolicy::immediate(2)).with_clock(fixed_clock())),
        trust: TrustPolicy::default(),
        wiki: Some(Arc::new(WikiClient::new(Arc::new(wiki_fixtures()), WIKI_API))),
        embedder: Arc::new(HashEmbedder::default()),
    }
}

/// Live simulation: the rule-based model over the corpus.
pub fn sim_services() -> Services {
    services(Arc::new(SimModel::default()), Arc::new(CorpusSearch::default()))
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Services that answer only from recorded fixture files in `dir`.
pub fn replay_services(dir: &Path) -> Result<Services, String> {
    let lm = ReplayBackend::load(&dir.join(LM_FIXTURE))?;
    let search = ReplaySearch::load(&dir.join(SEARCH_FIXTURE))?;
    Ok(services(Arc::new(lm), Arc::new(search)))
}

/// Creates a run directory under `base` for `mode` on the world's topic.
pub fn new_run(base: &Path, mode: RunMode, cfg: &PrewritingConfig, wcfg: &WritingConfig) -> RunDir {
    let config = serde_json::json!({ "prewriting": cfg, "writing": wcfg });
    let record = RunRecord::new(format!("sim-{mode}"), mode, topic(), config, fixed_time());
    RunDir::create(base, record).expect("create run dir")
}

/// Runs research and writing for `mode` in a fresh run directory.
pub fn run_mode(base: &Path, mode: RunMode, cfg: &PrewritingConfig, wcfg: &WritingConfig, services: &Services) -> Result<RunDir, storm_pipeline::PipelineError> {
    let mut dir = new_run(base, mode, cfg, wcfg);
    run::research(&mut dir, cfg, services)?;
    run::write(&mut dir, wcfg, services)?;
    Ok(dir)
}

/// Runs every mode against the live simulation under each config and writes
/// the model and search traffic to `dir` as replay fixtures.
pub fn record_fixtures(dir: &Path, configs: &[(PrewritingConfig, WritingConfig)], modes: &[RunMode]) -> Result<(), String> {
    let search = Arc::new(RecordingSearch::new(CorpusSearch::default()));
    let svc = services(Arc::new(SimModel::default()), search.clone());
    let scratch = std::env::temp_dir().join(format!("storm-fixtures-{}", std::process::id()));
    for (cfg, wcfg) in configs {
        for &mode in modes {
            let base = scratch.join(format!("n{}m{}", cfg.n, cfg.m));
            std::fs::create_dir_all(&base).map_err(|e| e.to_string())?;
            run_mode(&base, mode, cfg, wcfg, &svc).map_err(|e| format!("{mode}: {e}"))?;
        }
    }
    let _ = std::fs::remove_dir_all(&scratch);
    let entries: BTreeSet<(String, String, String)> = svc.lm.calls().into_iter().map(|c| (c.template, c.bindings_hash, c.response)).collect();
    let entries: Vec<ReplayEntry> = entries.into_iter().map(|(template, bindings_hash, response)| ReplayEntry { template, bindings_hash, response }).collect();
    let hits: BTreeMap<String, Vec<SearchHit>> = search.recorded();
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let write = |name: &str, v: serde_json::Value| std::fs::write(dir.join(name), serde_json::to_string_pretty(&v).expect("json") + "\n").map_err(|e| e.to_string());
    write(LM_FIXTURE, serde_json::to_value(entries).expect("json"))?;
    write(SEARCH_FIXTURE, serde_json::to_value(hits).expect("json"))?;
    Ok(())
}
