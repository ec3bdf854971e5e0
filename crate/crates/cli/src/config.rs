//! The TOML configuration file and its validation.
//!
//! String values may reference environment variables as `${NAME}`. API keys
//! may only be given that way; a key left out of the file is read from its
//! default variable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use storm_freshwiki::Endpoints;
use storm_lm::{ModelParams, LM_KEY_VAR};
use storm_pipeline::{PrewritingConfig, WritingConfig};
use storm_retrieval::EMBED_KEY_VAR;

use crate::CliError;

pub use storm_retrieval::SEARCH_KEY_VAR;
pub const DEFAULT_CONFIG: &str = "storm.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub run_dir: PathBuf,
    pub cache_dir: PathBuf,
    /// Trust policy file; the built-in blocklist when absent.
    pub trust_policy: Option<PathBuf>,
    /// Directory of prompt template overrides, one `<name>.txt` per template.
    pub prompt_dir: Option<PathBuf>,
    pub lm: LmConfig,
    pub search: SearchConfig,
    pub embedding: EmbeddingConfig,
    pub wiki: WikiConfig,
    pub prewriting: PrewritingConfig,
    pub writing: WritingConfig,
    pub eval: EvalConfig,
    pub freshwiki: FreshWikiConfig,
    pub bench: BenchConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            run_dir: "runs".into(),
            cache_dir: ".storm-cache".into(),
            trust_policy: None,
            prompt_dir: None,
            lm: LmConfig::default(),
            search: SearchConfig::default(),
            embedding: EmbeddingConfig::default(),
            wiki: WikiConfig::default(),
            prewriting: PrewritingConfig::default(),
            writing: WritingConfig::default(),
            eval: EvalConfig::default(),
            freshwiki: FreshWikiConfig::default(),
            bench: BenchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmConfig {
    pub general: LmEndpointConfig,
    /// Same as `general` when absent.
    pub question_asker: Option<LmEndpointConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LmProvider {
    /// OpenAI-compatible chat completions.
    #[default]
    Openai,
    /// Answers recorded in a fixture file.
    Replay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LmEndpointConfig {
    pub provider: LmProvider,
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
    pub context_window: usize,
    pub concurrency: usize,
    pub api_key: Option<String>,
    pub fixture: Option<PathBuf>,
}

impl Default for LmEndpointConfig {
    fn default() -> Self {
        let p = ModelParams::new("gpt-4");
        LmEndpointConfig {
            provider: LmProvider::Openai,
            base_url: "https://api.openai.com/v1".into(),
            model: p.model_name,
            temperature: p.temperature,
            top_p: p.top_p,
            max_tokens: p.max_tokens,
            context_window: 8_192,
            concurrency: 8,
            api_key: None,
            fixture: None,
        }
    }
}

impl LmEndpointConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams { model_name: self.model.clone(), temperature: self.temperature, top_p: self.top_p, max_tokens: self.max_tokens }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchProvider {
    #[default]
    Web,
    Replay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub provider: SearchProvider,
    pub base_url: String,
    pub api_key: Option<String>,
    pub fixture: Option<PathBuf>,
    pub concurrency: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { provider: SearchProvider::Web, base_url: "https://api.ydc-index.io/search".into(), api_key: None, fixture: None, concurrency: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingProviderKind {
    /// Local hashed bag of words.
    #[default]
    Hash,
    /// OpenAI-compatible embeddings endpoint.
    Remote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub provider: EmbeddingProviderKind,
    pub base_url: String,
    pub model: String,
    pub dimension: usize,
    pub api_key: Option<String>,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            provider: EmbeddingProviderKind::Hash,
            base_url: "https://api.openai.com/v1".into(),
            model: "text-embedding-3-small".into(),
            dimension: 1024,
            api_key: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WikiConfig {
    /// Without the wiki, perspectives are found with no related outlines.
    pub enabled: bool,
    pub api: String,
}

impl Default for WikiConfig {
    fn default() -> Self {
        WikiConfig { enabled: true, api: storm_retrieval::wiki::DEFAULT_API.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    /// Entailment verdicts from the general model.
    #[default]
    Lm,
    /// Support by normalized substring match.
    Substring,
    /// Skip citation metrics.
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub judge: JudgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreshWikiConfig {
    pub dataset_dir: PathBuf,
    pub concurrency: usize,
    pub metrics_api: String,
    pub action_api: String,
    pub quality_api: String,
}

impl Default for FreshWikiConfig {
    fn default() -> Self {
        let e = Endpoints::default();
        FreshWikiConfig { dataset_dir: "freshwiki".into(), concurrency: 4, metrics_api: e.metrics, action_api: e.action, quality_api: e.quality }
    }
}

impl FreshWikiConfig {
    pub fn endpoints(&self) -> Endpoints {
        Endpoints { metrics: self.metrics_api.clone(), action: self.action_api.clone(), quality: self.quality_api.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub out_dir: PathBuf,
    /// Topics run at once.
    pub parallel: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig { out_dir: "bench".into(), parallel: 1 }
    }
}

pub type EnvLookup<'a> = &'a dyn Fn(&str) -> Option<String>;

/// Replaces every `${NAME}` in `text`.
pub fn interpolate(text: &str, env: EnvLookup) -> Result<String, CliError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find('}').ok_or_else(|| CliError::Config(format!("unterminated `${{` in `{text}`")))?;
        let name = &after[..end];
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(CliError::Config(format!("bad variable name `{name}` in `{text}`")));
        }
        let value = env(name).ok_or_else(|| CliError::Config(format!("environment variable {name} is not set")))?;
        out.push_str(&value);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn is_reference(s: &str) -> bool {
    s.starts_with("${") && s.ends_with('}') && s.matches("${").count() == 1
}

fn interpolate_value(path: &str, value: &mut toml::Value, env: EnvLookup) -> Result<(), CliError> {
    match value {
        toml::Value::String(s) => {
            if path.ends_with("api_key") && !is_reference(s) {
                return Err(CliError::Config(format!("{path} must name an environment variable, as in \"${{{LM_KEY_VAR}}}\"")));
            }
            *s = interpolate(s, env)?;
        }
        toml::Value::Table(t) => {
            for (k, v) in t.iter_mut() {
                interpolate_value(&format!("{path}.{k}"), v, env)?;
            }
        }
        toml::Value::Array(items) => {
            for v in items {
                interpolate_value(path, v, env)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn key_or_env(given: &Option<String>, var: &str, env: EnvLookup) -> Option<String> {
    given.clone().or_else(|| env(var)).filter(|k| !k.trim().is_empty())
}

/// API keys after lookup, present only for providers that need them.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Secrets {
    pub general_lm: Option<String>,
    pub question_lm: Option<String>,
    pub search: Option<String>,
    pub embedding: Option<String>,
}

impl std::fmt::Debug for Secrets {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mask = |k: &Option<String>| k.as_ref().map(|_| "***");
        f.debug_struct("Secrets")
            .field("general_lm", &mask(&self.general_lm))
            .field("question_lm", &mask(&self.question_lm))
            .field("search", &mask(&self.search))
            .field("embedding", &mask(&self.embedding))
            .finish()
    }
}

impl AppConfig {
    pub fn parse(text: &str, env: EnvLookup) -> Result<Self, CliError> {
        let mut value: toml::Value = toml::from_str::<toml::Table>(text).map(toml::Value::Table).map_err(|e| CliError::Config(e.to_string()))?;
        interpolate_value("", &mut value, env)?;
        value.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    /// `path` if given, else `storm.toml` when it exists, else the defaults.
    pub fn load(path: Option<&Path>, env: EnvLookup) -> Result<Self, CliError> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None if Path::new(DEFAULT_CONFIG).exists() => PathBuf::from(DEFAULT_CONFIG),
            None => return Ok(AppConfig::default()),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, env).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn question_asker(&self) -> &LmEndpointConfig {
        self.lm.question_asker.as_ref().unwrap_or(&self.lm.general)
    }

    /// Checks everything a command could trip over later and looks up the
    /// keys the selected providers need.
    pub fn validate(&self, env: EnvLookup) -> Result<Secrets, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.prewriting.validate().map_err(|e| CliError::Config(format!("prewriting: {e}")))?;
        self.writing.validate().map_err(|e| CliError::Config(format!("writing: {e}")))?;
        let mut secrets = Secrets::default();
        for (name, lm) in [("lm.general", &self.lm.general), ("lm.question_asker", self.question_asker())] {
            lm.params().validate().map_err(|e| CliError::Config(format!("{name}: {e}")))?;
            if lm.concurrency == 0 || lm.context_window <= lm.max_tokens {
                return bad(format!("{name}: concurrency must be positive and context_window larger than max_tokens"));
            }
            let key = match lm.provider {
                LmProvider::Openai => {
                    let key = key_or_env(&lm.api_key, LM_KEY_VAR, env);
                    if key.is_none() {
                        return bad(format!("{name}: no API key; set {LM_KEY_VAR}"));
                    }
                    key
                }
                LmProvider::Replay => {
                    require_file(name, &lm.fixture)?;
                    None
                }
            };
            if name == "lm.general" {
                secrets.general_lm = key;
            } else {
                secrets.question_lm = key;
            }
        }
        match self.search.provider {
            SearchProvider::Web => {
                secrets.search = key_or_env(&self.search.api_key, SEARCH_KEY_VAR, env);
                if secrets.search.is_none() {
                    return bad(format!("search: no API key; set {SEARCH_KEY_VAR}"));
                }
                url_ok("search.base_url", &self.search.base_url)?;
            }
            SearchProvider::Replay => require_file("search", &self.search.fixture)?,
        }
        if self.search.concurrency == 0 {
            return bad("search.concurrency must be positive".into());
        }
        if self.embedding.dimension == 0 {
            return bad("embedding.dimension must be positive".into());
        }
        if self.embedding.provider == EmbeddingProviderKind::Remote {
            secrets.embedding = key_or_env(&self.embedding.api_key, EMBED_KEY_VAR, env);
            if secrets.embedding.is_none() {
                return bad(format!("embedding: no API key; set {EMBED_KEY_VAR}"));
            }
            url_ok("embedding.base_url", &self.embedding.base_url)?;
        }
        if self.wiki.enabled {
            url_ok("wiki.api", &self.wiki.api)?;
        }
        if let Some(p) = &self.trust_policy {
            storm_retrieval::TrustPolicy::load(p).map_err(|e| CliError::Config(format!("trust_policy: {e}")))?;
        }
        if let Some(d) = &self.prompt_dir {
            if !d.is_dir() {
                return bad(format!("prompt_dir {} is not a directory", d.display()));
            }
        }
        if self.bench.parallel == 0 {
            return bad("bench.parallel must be positive".into());
        }
        self.validate_freshwiki()?;
        Ok(secrets)
    }

    /// The part curation depends on; it needs no keys.
    pub fn validate_freshwiki(&self) -> Result<(), CliError> {
        if self.freshwiki.concurrency == 0 {
            return Err(CliError::Config("freshwiki.concurrency must be positive".into()));
        }
        for (name, u) in [("freshwiki.metrics_api", &self.freshwiki.metrics_api), ("freshwiki.action_api", &self.freshwiki.action_api), ("freshwiki.quality_api", &self.freshwiki.quality_api)] {
            url_ok(name, u)?;
        }
        Ok(())
    }
}

fn require_file(name: &str, path: &Option<PathBuf>) -> Result<(), CliError> {
    match path {
        Some(p) if p.is_file() => Ok(()),
        Some(p) => Err(CliError::Config(format!("{name}: fixture {} not found", p.display()))),
        None => Err(CliError::Config(format!("{name}: the replay provider needs a fixture path"))),
    }
}

fn url_ok(name: &str, u: &str) -> Result<(), CliError> {
    match url::Url::parse(u) {
        Ok(parsed) if matches!(parsed.scheme(), "http" | "https") => Ok(()),
        _ => Err(CliError::Config(format!("{name}: `{u}` is not an http(s) url"))),
    }
}
