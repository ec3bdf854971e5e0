//! Candidate selection, filtering and the on-disk dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use storm_core::run::write_atomic;
use storm_core::topic::slugify;
use storm_eval::{GroundTruth, HeadingSet};

use crate::api::{Assessment, CandidatePage, PageSnapshot, WikimediaClient};
use crate::text::{clean_extract, content_headings, count_references, word_count};
use crate::{FreshWikiError, QualityClass, YearMonth};

pub const INDEX: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub title: String,
    pub plain_text: String,
    /// Content headings of every level, appendix sections excluded.
    pub heading_set: HeadingSet,
    /// Level of each heading in `heading_set`, 1 at the top.
    pub heading_levels: Vec<usize>,
    pub reference_count: usize,
    pub word_count: usize,
    /// Day of the snapshotted revision.
    pub snapshot_date: NaiveDate,
    pub revision_id: u64,
    pub quality_class: QualityClass,
    pub edit_count: u64,
    pub month: YearMonth,
}

impl DatasetEntry {
    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth { title: self.title.clone(), headings: self.heading_set.clone(), text: self.plain_text.clone() }
    }

    /// The heading tree as `#` markup, for reading or for outline metrics.
    pub fn outline_markup(&self) -> String {
        self.heading_set.iter().zip(&self.heading_levels).map(|(h, l)| format!("{} {h}\n", "#".repeat(*l))).collect()
    }
}

/// Title-prefix approximation of stand-alone list detection.
pub fn is_list_title(title: &str) -> bool {
    let t = title.trim_start();
    t.starts_with("List of ") || t.starts_with("Lists of ")
}

/// Only assessed pages of class B or better pass.
pub fn quality_filter(class: Option<QualityClass>) -> bool {
    class.is_some_and(QualityClass::meets_threshold)
}

/// False for list articles and for pages without any content section.
pub fn structural_filter(entry: &DatasetEntry) -> bool {
    !is_list_title(&entry.title) && !entry.heading_set.is_empty()
}

/// Both filters, from the stored fields alone.
pub fn recheck(entry: &DatasetEntry) -> bool {
    quality_filter(Some(entry.quality_class)) && structural_filter(entry)
}

pub fn make_entry(candidate: &CandidatePage, assessment: &Assessment, snapshot: &PageSnapshot) -> DatasetEntry {
    let headings = content_headings(&snapshot.toc);
    let plain_text = clean_extract(&snapshot.extract);
    DatasetEntry {
        title: assessment.title.clone(),
        word_count: word_count(&plain_text),
        plain_text,
        heading_levels: headings.iter().map(|(_, l)| *l).collect(),
        heading_set: HeadingSet::new(headings.into_iter().map(|(h, _)| h)),
        reference_count: count_references(&snapshot.wikitext),
        snapshot_date: assessment.revision.timestamp.date_naive(),
        revision_id: assessment.revision.id,
        quality_class: assessment.quality,
        edit_count: candidate.edit_count,
        month: candidate.month,
    }
}

/// One entry per title across months, keeping the month with the most edits.
pub fn dedupe_candidates(candidates: impl IntoIterator<Item = CandidatePage>) -> Vec<CandidatePage> {
    let mut best: BTreeMap<String, CandidatePage> = BTreeMap::new();
    for c in candidates {
        match best.get(&c.title) {
            Some(b) if (b.edit_count, std::cmp::Reverse(b.month)) >= (c.edit_count, std::cmp::Reverse(c.month)) => {}
            _ => {
                best.insert(c.title.clone(), c);
            }
        }
    }
    best.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Entries with more plain-text words are left out.
    pub max_words: Option<usize>,
    /// Pages processed at once.
    pub concurrency: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { max_words: None, concurrency: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub title: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Sorted by title.
    pub entries: Vec<DatasetEntry>,
    pub skipped: Vec<Skipped>,
    pub candidates: usize,
}

enum Outcome {
    Kept(Box<DatasetEntry>),
    Skipped(String),
}

fn process(client: &WikimediaClient, candidate: &CandidatePage, opts: &BuildOptions) -> Outcome {
    if is_list_title(&candidate.title) {
        return Outcome::Skipped("list article".into());
    }
    let assessment = match client.assess_quality(&candidate.title) {
        Ok(a) => a,
        Err(e) => {
            log::warn!("dropping {}: {e}", candidate.title);
            return Outcome::Skipped(format!("no quality score: {e}"));
        }
    };
    if !quality_filter(Some(assessment.quality)) {
        return Outcome::Skipped(format!("quality {} below {}", assessment.quality, QualityClass::THRESHOLD));
    }
    let snapshot = match client.snapshot(&assessment.title, &assessment.revision) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("dropping {}: {e}", candidate.title);
            return Outcome::Skipped(format!("snapshot failed: {e}"));
        }
    };
    let entry = make_entry(candidate, &assessment, &snapshot);
    if !structural_filter(&entry) {
        return Outcome::Skipped("no subsections".into());
    }
    if let Some(cap) = opts.max_words {
        if entry.word_count > cap {
            return Outcome::Skipped(format!("{} words exceeds {cap}", entry.word_count));
        }
    }
    Outcome::Kept(Box::new(entry))
}

/// Fetch, filter and snapshot the most edited pages of `months`. A month
/// or page that fails is recorded in `skipped`; only an empty month list is
/// an error.
pub fn build_dataset(client: &WikimediaClient, months: &[YearMonth], opts: &BuildOptions) -> Result<BuildReport, FreshWikiError> {
    if months.is_empty() {
        return Err(FreshWikiError::NoMonths);
    }
    let mut skipped = Vec::new();
    let mut all = Vec::new();
    for &m in months {
        match client.fetch_top_edited(m) {
            Ok(pages) => all.extend(pages),
            Err(e) => {
                log::warn!("{e}");
                skipped.push(Skipped { title: format!("month {m}"), reason: e.to_string() });
            }
        }
    }
    let candidates = dedupe_candidates(all);
    let outcomes: Vec<Mutex<Option<Outcome>>> = candidates.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..opts.concurrency.max(1).min(candidates.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(c) = candidates.get(i) else { break };
                let outcome = process(client, c, opts);
                *outcomes[i].lock().expect("outcome lock poisoned") = Some(outcome);
            });
        }
    });
    let mut entries = Vec::new();
    for (c, slot) in candidates.iter().zip(outcomes) {
        match slot.into_inner().expect("outcome lock poisoned") {
            Some(Outcome::Kept(e)) => entries.push(*e),
            Some(Outcome::Skipped(reason)) => skipped.push(Skipped { title: c.title.clone(), reason }),
            None => skipped.push(Skipped { title: c.title.clone(), reason: "not processed".into() }),
        }
    }
    entries.sort_by(|a, b| a.title.cmp(&b.title));
    let mut seen = BTreeSet::new();
    entries.retain(|e| seen.insert(e.title.clone()));
    Ok(BuildReport { entries, skipped, candidates: candidates.len() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub title: String,
    pub file: String,
    pub word_count: usize,
    pub quality_class: QualityClass,
    pub edit_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub months: Vec<YearMonth>,
    pub max_words: Option<usize>,
    pub candidates: usize,
    pub entries: Vec<IndexEntry>,
    pub skipped: Vec<Skipped>,
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("dataset types serialize");
    bytes.push(b'\n');
    bytes
}

/// Writes `{slug}.json` per entry and `index.json`; entry files listed by a
/// previous index but no longer part of the dataset are removed.
pub fn write_dataset(dir: &Path, months: &[YearMonth], opts: &BuildOptions, report: &BuildReport) -> Result<DatasetIndex, FreshWikiError> {
    fs::create_dir_all(dir).map_err(|e| FreshWikiError::io(dir, e))?;
    let previous = read_index(dir).ok();
    let mut used = BTreeSet::new();
    let mut entries = Vec::new();
    for e in &report.entries {
        let base = slugify(&e.title);
        let mut file = format!("{base}.json");
        let mut n = 2;
        while !used.insert(file.clone()) {
            file = format!("{base}-{n}.json");
            n += 1;
        }
        write_atomic(&dir.join(&file), &to_json(e))?;
        entries.push(IndexEntry { title: e.title.clone(), file, word_count: e.word_count, quality_class: e.quality_class, edit_count: e.edit_count });
    }
    if let Some(prev) = previous {
        for old in prev.entries.iter().filter(|o| !used.contains(&o.file)) {
            let _ = fs::remove_file(dir.join(&old.file));
        }
    }
    let index = DatasetIndex { months: months.to_vec(), max_words: opts.max_words, candidates: report.candidates, entries, skipped: report.skipped.clone() };
    write_atomic(&dir.join(INDEX), &to_json(&index))?;
    Ok(index)
}

pub fn read_index(dir: &Path) -> Result<DatasetIndex, FreshWikiError> {
    Ok(storm_core::run::read_json_file(&dir.join(INDEX))?)
}

/// Every entry listed in the index, in index order.
pub fn load_dataset(dir: &Path) -> Result<Vec<DatasetEntry>, FreshWikiError> {
    let index = read_index(dir)?;
    index.entries.iter().map(|i| Ok(storm_core::run::read_json_file(&dir.join(&i.file))?)).collect()
}

pub fn entry_path(dir: &Path, index: &IndexEntry) -> PathBuf {
    dir.join(&index.file)
}
