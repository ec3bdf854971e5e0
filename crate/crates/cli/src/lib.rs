//! The `storm` command line: research a topic, write the article, evaluate
//! it, curate a dataset of recent articles and benchmark modes over it.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use storm_core::run::make_run_id;
use storm_core::{RunDir, RunMode, RunRecord, Topic};
use storm_eval::{evaluate_run, Evaluator, GroundTruth, MetricsReport, METRICS};
use storm_freshwiki::{DatasetEntry, WikimediaClient, YearMonth};
use storm_pipeline::run::{self, ARTICLE_JSON, ARTICLE_MD, OUTLINE};
use storm_pipeline::{PrewritingConfig, WritingConfig};

mod bench;
pub mod config;
mod error;
pub mod services;

pub use bench::{run_bench, BenchOptions, BenchReport, BenchRow, RunStatus};
pub use config::{AppConfig, JudgeKind};
pub use error::{CliError, EXIT_CONFIG, EXIT_FAILURE, EXIT_MISSING, EXIT_OK, EXIT_UPSTREAM};
pub use services::{Context, Stack};

#[derive(Debug, Parser)]
#[command(name = "storm", version, about = "Research a topic and write a cited, Wikipedia-style article")]
pub struct Cli {
    /// Config file; `storm.toml` is used when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Serve network requests from the cache only; a miss is an error.
    #[arg(long, global = true)]
    pub offline: bool,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collect references and build an outline for a topic.
    Research(ResearchArgs),
    /// Write the article of a researched run.
    Write(WriteArgs),
    /// Compute metrics of a run against a ground-truth article.
    Eval(EvalArgs),
    /// Build a dataset of recent, heavily edited, high-quality articles.
    Curate(CurateArgs),
    /// Run modes over every topic of a dataset and compare their metrics.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct PrewritingFlags {
    /// Perspectives besides the basic fact writer.
    #[arg(long)]
    pub n: Option<usize>,
    /// Conversation rounds.
    #[arg(long)]
    pub m: Option<usize>,
}

impl PrewritingFlags {
    pub fn apply(&self, mut cfg: PrewritingConfig) -> PrewritingConfig {
        cfg.n = self.n.unwrap_or(cfg.n);
        cfg.m = self.m.unwrap_or(cfg.m);
        cfg
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct WritingFlags {
    /// References retrieved per section.
    #[arg(long)]
    pub section_k: Option<usize>,
    /// Token budget of the finished article, references excluded.
    #[arg(long)]
    pub token_cap: Option<usize>,
}

impl WritingFlags {
    pub fn apply(&self, mut cfg: WritingConfig) -> WritingConfig {
        cfg.section_k = self.section_k.unwrap_or(cfg.section_k);
        cfg.article_token_cap = self.token_cap.unwrap_or(cfg.article_token_cap);
        cfg
    }

    fn is_empty(&self) -> bool {
        self.section_k.is_none() && self.token_cap.is_none()
    }
}

#[derive(Debug, Args)]
pub struct ResearchArgs {
    pub topic: String,
    #[arg(long, default_value = "storm")]
    pub mode: RunMode,
    #[command(flatten)]
    pub prewriting: PrewritingFlags,
    /// Page never returned by search, usually the topic's own article.
    #[arg(long)]
    pub exclude_url: Option<String>,
    /// Resume or name the run instead of a fresh timestamped id.
    #[arg(long)]
    pub run_id: Option<String>,
}

#[derive(Debug, Args)]
pub struct WriteArgs {
    /// Run id under the run directory, or a path to a run.
    pub run: String,
    #[command(flatten)]
    pub writing: WritingFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub run: String,
    /// Dataset entry or ground-truth JSON; outline and article metrics are
    /// skipped without one.
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub judge: Option<JudgeKind>,
}

#[derive(Debug, Args)]
pub struct CurateArgs {
    /// Months as `2022-02..2023-09`, comma separated ranges allowed.
    #[arg(long)]
    pub months: String,
    /// Leave out articles with more plain-text words.
    #[arg(long)]
    pub max_words: Option<usize>,
    /// Dataset directory; `freshwiki.dataset_dir` by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dataset directory; `freshwiki.dataset_dir` by default.
    pub dataset: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "storm")]
    pub mode: Vec<RunMode>,
    #[command(flatten)]
    pub prewriting: PrewritingFlags,
    #[command(flatten)]
    pub writing: WritingFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Topics run at once; one at a time by default.
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long, value_enum)]
    pub judge: Option<JudgeKind>,
}

/// Parses `args`, runs the command and returns the process exit code.
/// Results go to `out`, diagnostics to `err`.
pub fn main_with<I, T>(args: I, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match run(&cli, ctx, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "storm: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let env = |k: &str| ctx.lookup(k);
    let config = AppConfig::load(cli.config.as_deref(), &env)?;
    match &cli.command {
        Command::Research(a) => cmd_research(&Stack::new(config, ctx, cli.offline)?, a, out).map(|_| ()),
        Command::Write(a) => cmd_write(&Stack::new(config, ctx, cli.offline)?, a, out).map(|_| ()),
        Command::Eval(a) => cmd_eval(&Stack::new(config, ctx, cli.offline)?, a, out).map(|_| ()),
        Command::Curate(a) => cmd_curate(config, ctx, cli.offline, a, out).map(|_| ()),
        Command::Bench(a) => {
            let stack = Stack::new(config, ctx, cli.offline)?;
            let opts = BenchOptions {
                dataset: a.dataset.clone().unwrap_or_else(|| stack.config.freshwiki.dataset_dir.clone()),
                out_dir: a.out.clone().unwrap_or_else(|| stack.config.bench.out_dir.clone()),
                modes: a.mode.clone(),
                prewriting: a.prewriting.apply(stack.config.prewriting.clone()),
                writing: a.writing.apply(stack.config.writing.clone()),
                judge: a.judge.unwrap_or(stack.config.eval.judge),
                parallel: a.parallel.unwrap_or(stack.config.bench.parallel),
            };
            let report = run_bench(&stack, &opts)?;
            out_err(out.write_all(report.table().as_bytes()))?;
            out_err(writeln!(out, "results: {}\nsummary: {}", report.results_csv.display(), report.summary_csv.display()))
        }
    }
}

fn out_err(r: std::io::Result<()>) -> Result<(), CliError> {
    r.map_err(|e| CliError::Other(format!("cannot write output: {e}")))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

/// The config snapshot stored in a run record.
pub fn run_config(prewriting: &PrewritingConfig, writing: &WritingConfig) -> serde_json::Value {
    serde_json::json!({ "prewriting": prewriting, "writing": writing })
}

/// A run id under `run_dir`, or a path to an existing run directory.
pub fn resolve_run(run_dir: &Path, run: &str) -> PathBuf {
    let path = Path::new(run);
    if path.join(storm_core::run::RUN_FILE).exists() {
        path.to_path_buf()
    } else {
        run_dir.join(run)
    }
}

fn open_run(stack: &Stack, run: &str) -> Result<RunDir, CliError> {
    let root = resolve_run(&stack.config.run_dir, run);
    RunDir::open(&root).map_err(|e| match e {
        storm_core::CoreError::MissingArtifact(_) => CliError::Missing(format!("no run at {} (start one with `storm research`)", root.display())),
        other => other.into(),
    })
}

pub fn cmd_research(stack: &Stack, args: &ResearchArgs, out: &mut dyn Write) -> Result<String, CliError> {
    let mut topic = Topic::new(args.topic.clone())?;
    if let Some(u) = &args.exclude_url {
        topic = topic.with_exclusion(u.clone());
    }
    let prewriting = args.prewriting.apply(stack.config.prewriting.clone());
    let now = stack.ctx.now();
    let run_id = args.run_id.clone().unwrap_or_else(|| make_run_id(now, &topic));
    let record = RunRecord::new(run_id.clone(), args.mode, topic, run_config(&prewriting, &stack.config.writing), now);
    let mut dir = RunDir::create(&stack.config.run_dir, record)?;
    let services = stack.services()?;
    run::research(&mut dir, &prewriting, &services)?;
    let outline = dir.read_text(OUTLINE)?;
    out_err(writeln!(out, "run: {run_id}\ndir: {}\n\n{}", dir.root().display(), outline.trim_end()))?;
    Ok(run_id)
}

/// Writing settings recorded with the run, with `flags` on top.
fn writing_config(dir: &RunDir, fallback: &WritingConfig, flags: &WritingFlags) -> Result<WritingConfig, CliError> {
    let recorded = match dir.record().config().get("writing") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("run record writing config: {e}")))?,
        None => fallback.clone(),
    };
    Ok(flags.apply(recorded))
}

pub fn cmd_write(stack: &Stack, args: &WriteArgs, out: &mut dyn Write) -> Result<[PathBuf; 2], CliError> {
    let mut dir = open_run(stack, &args.run)?;
    let cfg = writing_config(&dir, &stack.config.writing, &args.writing)?;
    if dir.record().is_complete(storm_core::Stage::Writing) && !args.writing.is_empty() {
        log::warn!("the article of {} is already written; writing flags are ignored", dir.record().run_id);
    }
    let services = stack.services()?;
    run::write(&mut dir, &cfg, &services)?;
    let paths = [dir.path_of(ARTICLE_MD), dir.path_of(ARTICLE_JSON)];
    out_err(writeln!(out, "{}\n{}", paths[0].display(), paths[1].display()))?;
    Ok(paths)
}

/// A dataset entry file or a bare ground-truth file.
pub fn load_ground_truth(path: &Path) -> Result<GroundTruth, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Missing(format!("ground truth {}: {e}", path.display())))?;
    if let Ok(entry) = serde_json::from_str::<DatasetEntry>(&text) {
        return Ok(entry.ground_truth());
    }
    serde_json::from_str::<GroundTruth>(&text).map_err(|e| CliError::Config(format!("{} is neither a dataset entry nor a ground truth: {e}", path.display())))
}

pub fn evaluate_dir(stack: &Stack, dir: &mut RunDir, truth: Option<&GroundTruth>, judge: JudgeKind) -> Result<MetricsReport, CliError> {
    let embedder = stack.embedder();
    let ner = stack.ner();
    let lm = std::sync::Arc::new(stack.gateway()?);
    let judge = stack.judge(judge, &lm);
    let ev = Evaluator { embedder: embedder.as_ref(), ner: &ner, judge: judge.as_deref() };
    Ok(evaluate_run(dir, truth, &ev)?)
}

pub fn cmd_eval(stack: &Stack, args: &EvalArgs, out: &mut dyn Write) -> Result<MetricsReport, CliError> {
    let truth = args.ground_truth.as_deref().map(load_ground_truth).transpose()?;
    let mut dir = open_run(stack, &args.run)?;
    let report = evaluate_dir(stack, &mut dir, truth.as_ref(), args.judge.unwrap_or(stack.config.eval.judge))?;
    out_err(write!(out, "{}", report.to_table()))?;
    out_err(writeln!(out, "{}", dir.path_of(METRICS).display()))?;
    Ok(report)
}

pub fn cmd_curate(config: AppConfig, ctx: &Context, offline: bool, args: &CurateArgs, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    config.validate_freshwiki()?;
    let months = YearMonth::parse_list(&args.months).map_err(|e| CliError::Config(format!("--months: {e}")))?;
    let dir = args.out.clone().unwrap_or_else(|| config.freshwiki.dataset_dir.clone());
    let http = services::caching_http(&config, ctx, offline);
    let client = WikimediaClient::new(http, config.freshwiki.endpoints(), ctx.now().date_naive());
    let opts = storm_freshwiki::BuildOptions { max_words: args.max_words, concurrency: config.freshwiki.concurrency };
    let report = storm_freshwiki::build_dataset(&client, &months, &opts)?;
    let index = storm_freshwiki::write_dataset(&dir, &months, &opts, &report)?;
    out_err(writeln!(out, "{} of {} candidates kept in {}", index.entries.len(), index.candidates, dir.display()))?;
    for s in &index.skipped {
        out_err(writeln!(out, "  skipped {}: {}", s.title, s.reason))?;
    }
    if index.entries.is_empty() {
        log::warn!("the dataset is empty");
    }
    std::fs::metadata(&dir).map_err(|e| io_err(&dir, e))?;
    Ok(dir)
}
