use std::sync::Arc;

use serde::{Deserialize, Serialize};
use storm_lm::LmGateway;
use storm_retrieval::{EmbeddingProvider, Searcher, TrustPolicy, WikiClient};

use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrewritingConfig {
    /// Maximum number of discovered perspectives, besides the basic fact writer.
    pub n: usize,
    /// Maximum conversation rounds.
    pub m: usize,
    pub max_queries_per_question: usize,
    pub search_k: usize,
    /// Results of the single topic search of the retrieval baselines.
    pub rag_search_k: usize,
    /// Transcript words kept for outline refinement.
    pub transcript_word_budget: usize,
    /// Snippet words given to the expert per answer.
    pub answer_info_word_budget: usize,
}

impl Default for PrewritingConfig {
    fn default() -> Self {
        PrewritingConfig {
            n: 5,
            m: 5,
            max_queries_per_question: 5,
            search_k: 5,
            rag_search_k: 10,
            transcript_word_budget: 12_000,
            answer_info_word_budget: 3_000,
        }
    }
}

impl PrewritingConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.m < 1 {
            return Err(PipelineError::Invalid("m must be at least 1".into()));
        }
        if self.search_k < 1 || self.max_queries_per_question < 1 {
            return Err(PipelineError::Invalid("search_k and max_queries_per_question must be at least 1".into()));
        }
        Ok(())
    }

    /// Upper bound on questions any question-asking mode may issue.
    pub fn max_questions(&self) -> usize {
        (self.n + 1) * self.m
    }
}

/// Order in which section-writing tasks are started when not run in parallel.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionOrder {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WritingConfig {
    pub section_k: usize,
    pub article_token_cap: usize,
    pub parallel_sections: bool,
    pub section_order: SectionOrder,
    /// Reference words given to single-prompt article writers.
    pub article_info_word_budget: usize,
}

impl Default for WritingConfig {
    fn default() -> Self {
        WritingConfig {
            section_k: 10,
            article_token_cap: 4000,
            parallel_sections: true,
            section_order: SectionOrder::Forward,
            article_info_word_budget: 6_000,
        }
    }
}

impl WritingConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.section_k < 1 {
            return Err(PipelineError::Invalid("section_k must be at least 1".into()));
        }
        if self.article_token_cap < 500 {
            return Err(PipelineError::Invalid("article_token_cap must be at least 500".into()));
        }
        Ok(())
    }
}

/// Everything the stages talk to.
#[derive(Clone)]
pub struct Services {
    pub lm: Arc<LmGateway>,
    pub searcher: Arc<Searcher>,
    pub trust: TrustPolicy,
    /// Without a client, perspective discovery runs with no example outlines.
    pub wiki: Option<Arc<WikiClient>>,
    pub embedder: Arc<dyn EmbeddingProvider>,
}
