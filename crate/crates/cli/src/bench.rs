//! Every mode over every dataset topic, with per-mode metric means.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use storm_core::{RunDir, RunMode, RunRecord, Stage, Topic};
use storm_eval::{MetricsReport, METRICS};
use storm_freshwiki::DatasetEntry;
use storm_pipeline::{run, PrewritingConfig, WritingConfig};

use crate::{evaluate_dir, run_config, CliError, JudgeKind, Stack};

/// Columns of both tables, all in percent.
pub const METRIC_COLUMNS: [&str; 7] =
    ["heading_soft_recall", "heading_entity_recall", "rouge1_f1", "rougeL_f1", "article_entity_recall", "citation_recall", "citation_precision"];

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub dataset: PathBuf,
    pub out_dir: PathBuf,
    pub modes: Vec<RunMode>,
    pub prewriting: PrewritingConfig,
    pub writing: WritingConfig,
    pub judge: JudgeKind,
    pub parallel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// Metrics were already on disk from an earlier bench.
    Reused,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::Reused => "reused",
            RunStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub topic: String,
    pub mode: RunMode,
    pub run_id: String,
    pub status: RunStatus,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

pub fn metric_values(m: &MetricsReport) -> [Option<f64>; 7] {
    [
        m.soft_heading_recall.map(|x| 100.0 * x),
        m.heading_entity_recall,
        m.rouge1.map(|s| 100.0 * s.f1),
        m.rouge_l.map(|s| 100.0 * s.f1),
        m.article_entity_recall,
        m.citation_recall,
        m.citation_precision,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSummary {
    pub mode: RunMode,
    pub topics: usize,
    pub failed: usize,
    /// Mean over the runs where the metric was available.
    pub means: [Option<f64>; 7],
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<ModeSummary>,
    pub results_csv: PathBuf,
    pub summary_csv: PathBuf,
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

impl BenchReport {
    /// One row per mode, aligned columns.
    pub fn table(&self) -> String {
        let mut header = vec!["mode".to_string(), "topics".into(), "failed".into()];
        header.extend(METRIC_COLUMNS.iter().map(|c| c.to_string()));
        let mut rows = vec![header];
        for s in &self.summary {
            let mut r = vec![s.mode.to_string(), s.topics.to_string(), s.failed.to_string()];
            r.extend(s.means.iter().map(|v| fmt_value(*v)));
            rows.push(r);
        }
        let widths: Vec<usize> = (0..rows[0].len()).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for (i, r) in rows.iter().enumerate() {
            let cells: Vec<String> = r.iter().zip(&widths).enumerate().map(|(c, (v, w))| if c == 0 { format!("{v:<w$}") } else { format!("{v:>w$}") }).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 {
                let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
            }
        }
        out
    }
}

pub fn summarize(rows: &[BenchRow], modes: &[RunMode]) -> Vec<ModeSummary> {
    modes
        .iter()
        .map(|&mode| {
            let of_mode: Vec<&BenchRow> = rows.iter().filter(|r| r.mode == mode).collect();
            let values: Vec<[Option<f64>; 7]> = of_mode.iter().filter_map(|r| r.metrics.as_ref()).map(metric_values).collect();
            let mut means = [None; 7];
            for (i, slot) in means.iter_mut().enumerate() {
                let present: Vec<f64> = values.iter().filter_map(|v| v[i]).collect();
                if !present.is_empty() {
                    *slot = Some(present.iter().sum::<f64>() / present.len() as f64);
                }
            }
            ModeSummary { mode, topics: of_mode.len(), failed: of_mode.iter().filter(|r| r.status == RunStatus::Failed).count(), means }
        })
        .collect()
}

/// Wikipedia page of a dataset topic, kept out of search results.
pub fn article_url(title: &str) -> String {
    format!("https://en.wikipedia.org/wiki/{}", title.trim().replace(' ', "_"))
}

pub fn run_id(entry: &DatasetEntry, mode: RunMode) -> String {
    format!("{}--{mode}", storm_core::topic::slugify(&entry.title))
}

fn run_one(stack: &Stack, opts: &BenchOptions, runs: &Path, entry: &DatasetEntry, mode: RunMode) -> Result<(RunStatus, MetricsReport), CliError> {
    let topic = Topic::new(entry.title.clone())?.with_exclusion(article_url(&entry.title));
    let record = RunRecord::new(run_id(entry, mode), mode, topic, run_config(&opts.prewriting, &opts.writing), stack.ctx.now());
    let mut dir = RunDir::create(runs, record)?;
    if dir.record().is_complete(Stage::Writing) && dir.has_artifact(METRICS) {
        return Ok((RunStatus::Reused, dir.read_json(METRICS)?));
    }
    let services = stack.services()?;
    run::research(&mut dir, &opts.prewriting, &services)?;
    run::write(&mut dir, &opts.writing, &services)?;
    let metrics = evaluate_dir(stack, &mut dir, Some(&entry.ground_truth()), opts.judge)?;
    Ok((RunStatus::Completed, metrics))
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

fn write_results(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["topic", "mode", "run_id", "status"];
    header.extend(METRIC_COLUMNS);
    header.push("error");
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        let mut rec = vec![r.topic.clone(), r.mode.to_string(), r.run_id.clone(), r.status.as_str().to_string()];
        let values = r.metrics.as_ref().map(metric_values).unwrap_or_default();
        rec.extend(values.iter().map(|v| v.map(|x| format!("{x:.4}")).unwrap_or_default()));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

fn write_summary(path: &Path, summary: &[ModeSummary]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["mode", "topics", "failed"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for s in summary {
        let mut rec = vec![s.mode.to_string(), s.topics.to_string(), s.failed.to_string()];
        rec.extend(s.means.iter().map(|v| v.map(|x| format!("{x:.4}")).unwrap_or_default()));
        w.write_record(&rec).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

/// Runs each mode on each topic under `out_dir/runs`. Pairs whose metrics
/// are already there are not run again; a failing pair is recorded and the
/// batch goes on.
pub fn run_bench(stack: &Stack, opts: &BenchOptions) -> Result<BenchReport, CliError> {
    let mut modes = Vec::new();
    for m in &opts.modes {
        if !modes.contains(m) {
            modes.push(*m);
        }
    }
    if modes.is_empty() {
        return Err(CliError::Config("no modes to benchmark".into()));
    }
    opts.prewriting.validate()?;
    opts.writing.validate()?;
    if !opts.dataset.join(storm_freshwiki::INDEX).exists() {
        return Err(CliError::Missing(format!("no dataset index in {} (build one with `storm curate`)", opts.dataset.display())));
    }
    let entries = storm_freshwiki::load_dataset(&opts.dataset)?;
    if entries.is_empty() {
        return Err(CliError::Missing(format!("dataset {} has no entries", opts.dataset.display())));
    }
    let runs = opts.out_dir.join("runs");
    std::fs::create_dir_all(&runs).map_err(|e| csv_err(&runs, e))?;
    let pairs: Vec<(&DatasetEntry, RunMode)> = entries.iter().flat_map(|e| modes.iter().map(move |m| (e, *m))).collect();
    let slots: Vec<Mutex<Option<BenchRow>>> = pairs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..opts.parallel.max(1).min(pairs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(entry, mode)) = pairs.get(i) else { break };
                log::info!("bench {}/{}: {} with {mode}", i + 1, pairs.len(), entry.title);
                let row = match run_one(stack, opts, &runs, entry, mode) {
                    Ok((status, metrics)) => BenchRow { topic: entry.title.clone(), mode, run_id: run_id(entry, mode), status, metrics: Some(metrics), error: None },
                    Err(e) => {
                        log::warn!("{} with {mode} failed: {e}", entry.title);
                        BenchRow { topic: entry.title.clone(), mode, run_id: run_id(entry, mode), status: RunStatus::Failed, metrics: None, error: Some(e.to_string()) }
                    }
                };
                *slots[i].lock().expect("bench slot poisoned") = Some(row);
            });
        }
    });
    let rows: Vec<BenchRow> = slots.into_iter().filter_map(|s| s.into_inner().expect("bench slot poisoned")).collect();
    let summary = summarize(&rows, &modes);
    let results_csv = opts.out_dir.join("results.csv");
    let summary_csv = opts.out_dir.join("summary.csv");
    write_results(&results_csv, &rows)?;
    write_summary(&summary_csv, &summary)?;
    Ok(BenchReport { rows, summary, results_csv, summary_csv })
}
