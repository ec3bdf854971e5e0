//! Turning a validated config into pipeline services.

use std::collections::HashMap;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use storm_eval::{CapitalizedSpans, EntailmentJudge, LmJudge, SubstringJudge};
use storm_http::{CacheMode, CachingClient, DiskCache, HttpClient, RetryPolicy, UreqClient};
use storm_lm::{ChatBackend, Endpoint, LmGateway, ModelRole, OpenAiBackend, PromptRegistry, ReplayBackend};
use storm_pipeline::Services;
use storm_retrieval::{Clock, EmbeddingProvider, HashEmbedder, RemoteEmbedder, ReplaySearch, SearchBackend, Searcher, TrustPolicy, WebSearch, WikiClient};

use crate::config::{AppConfig, EmbeddingProviderKind, JudgeKind, LmEndpointConfig, LmProvider, SearchProvider, Secrets};
use crate::CliError;

pub type EnvFn = Box<dyn Fn(&str) -> Option<String> + Send + Sync>;

/// What a command may touch outside its config: environment, network,
/// clock. Tests swap in fixtures and stand-in backends.
pub struct Context {
    pub env: EnvFn,
    pub transport: Arc<dyn HttpClient>,
    pub clock: Clock,
    /// Serves every model role instead of the configured providers.
    pub lm_override: Option<Arc<dyn ChatBackend>>,
    pub search_override: Option<Arc<dyn SearchBackend>>,
    pub retry: Option<RetryPolicy>,
}

impl Context {
    /// The process environment, the live network and the wall clock.
    pub fn system() -> Self {
        Context {
            env: Box::new(|k| std::env::var(k).ok()),
            transport: Arc::new(UreqClient::default()),
            clock: Arc::new(Utc::now),
            lm_override: None,
            search_override: None,
            retry: None,
        }
    }

    pub fn with_env(mut self, vars: &[(&str, &str)]) -> Self {
        let map: HashMap<String, String> = vars.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        self.env = Box::new(move |k| map.get(k).cloned());
        self
    }

    pub fn with_transport(mut self, http: Arc<dyn HttpClient>) -> Self {
        self.transport = http;
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_lm(mut self, lm: Arc<dyn ChatBackend>) -> Self {
        self.lm_override = Some(lm);
        self
    }

    pub fn with_search(mut self, search: Arc<dyn SearchBackend>) -> Self {
        self.search_override = Some(search);
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = Some(retry);
        self
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    pub fn lookup(&self, key: &str) -> Option<String> {
        (self.env)(key)
    }
}

/// The context's transport behind the on-disk response cache; offline,
/// a cache miss is an error instead of a request.
pub fn caching_http(config: &AppConfig, ctx: &Context, offline: bool) -> Arc<dyn HttpClient> {
    let mode = if offline { CacheMode::Offline } else { CacheMode::ReadWrite };
    Arc::new(CachingClient::new(Arc::clone(&ctx.transport), DiskCache::new(config.cache_dir.join("http")), mode))
}

/// A validated config with its keys, ready to build services.
pub struct Stack<'a> {
    pub config: AppConfig,
    pub ctx: &'a Context,
    secrets: Secrets,
    registry: PromptRegistry,
    trust: TrustPolicy,
    http: Arc<dyn HttpClient>,
}

impl<'a> Stack<'a> {
    /// Validates everything up front; nothing has been sent when this fails.
    pub fn new(config: AppConfig, ctx: &'a Context, offline: bool) -> Result<Self, CliError> {
        let env = |k: &str| ctx.lookup(k);
        let secrets = config.validate(&env)?;
        let mut registry = PromptRegistry::default();
        if let Some(dir) = &config.prompt_dir {
            registry.load_overrides(dir).map_err(|e| CliError::Config(format!("prompt_dir: {e}")))?;
        }
        let trust = match &config.trust_policy {
            Some(p) => TrustPolicy::load(p).map_err(CliError::Config)?,
            None => TrustPolicy::default(),
        };
        let http = caching_http(&config, ctx, offline);
        Ok(Stack { config, ctx, secrets, registry, trust, http })
    }

    pub fn http(&self) -> Arc<dyn HttpClient> {
        Arc::clone(&self.http)
    }

    fn retry(&self) -> RetryPolicy {
        self.ctx.retry.unwrap_or_default()
    }

    fn chat_backend(&self, cfg: &LmEndpointConfig, key: &Option<String>) -> Result<Arc<dyn ChatBackend>, CliError> {
        if let Some(lm) = &self.ctx.lm_override {
            return Ok(Arc::clone(lm));
        }
        Ok(match cfg.provider {
            LmProvider::Openai => Arc::new(OpenAiBackend::new(self.http(), cfg.base_url.clone(), key.clone())),
            LmProvider::Replay => {
                let path = cfg.fixture.as_ref().expect("validated replay fixture");
                Arc::new(ReplayBackend::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
            }
        })
    }

    fn endpoint(&self, cfg: &LmEndpointConfig, key: &Option<String>) -> Result<Endpoint, CliError> {
        Ok(Endpoint::new(self.chat_backend(cfg, key)?, cfg.params()).with_context_window(cfg.context_window).with_concurrency(cfg.concurrency))
    }

    pub fn gateway(&self) -> Result<LmGateway, CliError> {
        let general = self.endpoint(&self.config.lm.general, &self.secrets.general_lm)?;
        let asker = self.endpoint(self.config.question_asker(), &self.secrets.question_lm)?;
        Ok(LmGateway::new(self.registry.clone())
            .with_endpoint(ModelRole::General, general)
            .with_endpoint(ModelRole::QuestionAsker, asker)
            .with_retry(self.retry()))
    }

    fn search_backend(&self) -> Result<Arc<dyn SearchBackend>, CliError> {
        if let Some(s) = &self.ctx.search_override {
            return Ok(Arc::clone(s));
        }
        let c = &self.config.search;
        Ok(match c.provider {
            SearchProvider::Web => Arc::new(WebSearch::new(self.http(), c.base_url.clone(), self.secrets.search.clone())),
            SearchProvider::Replay => {
                let path = c.fixture.as_ref().expect("validated replay fixture");
                Arc::new(ReplaySearch::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?)
            }
        })
    }

    pub fn embedder(&self) -> Arc<dyn EmbeddingProvider> {
        let c = &self.config.embedding;
        match c.provider {
            EmbeddingProviderKind::Hash => Arc::new(HashEmbedder::new(c.dimension)),
            EmbeddingProviderKind::Remote => Arc::new(RemoteEmbedder::new(self.http(), &c.base_url, &c.model, c.dimension, self.secrets.embedding.clone())),
        }
    }

    /// Fresh services, so call logs of separate runs stay apart.
    pub fn services(&self) -> Result<Services, CliError> {
        let searcher = Searcher::new(self.search_backend()?)
            .with_retry(self.retry())
            .with_concurrency(self.config.search.concurrency)
            .with_clock(Arc::clone(&self.ctx.clock));
        let wiki = self.config.wiki.enabled.then(|| Arc::new(WikiClient::new(self.http(), self.config.wiki.api.clone())));
        Ok(Services { lm: Arc::new(self.gateway()?), searcher: Arc::new(searcher), trust: self.trust.clone(), wiki, embedder: self.embedder() })
    }

    pub fn judge(&self, kind: JudgeKind, lm: &Arc<LmGateway>) -> Option<Box<dyn EntailmentJudge>> {
        match kind {
            JudgeKind::Lm => Some(Box::new(LmJudge::new(Arc::clone(lm)))),
            JudgeKind::Substring => Some(Box::new(SubstringJudge)),
            JudgeKind::None => None,
        }
    }

    pub fn ner(&self) -> CapitalizedSpans {
        CapitalizedSpans
    }
}
