//! Pipeline configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Backend model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub model_id: String,
    /// Base URL of an OpenAI-compatible chat-completion API.
    pub base_url: String,
    /// Temperature for extraction prompts.
    pub temperature: f64,
    /// Temperature for relation generation.
    pub relation_temperature: f64,
    pub max_output_chars: usize,
    /// Transport retries before giving up.
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    pub timeout_secs: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            model_id: "gpt-3.5-turbo".to_string(),
            base_url: "https://api.openai.com/v1".to_string(),
            temperature: 0.0,
            relation_temperature: 0.7,
            max_output_chars: 2048,
            max_retries: 3,
            initial_backoff_ms: 500,
            timeout_secs: 60,
        }
    }
}

/// Which `Sim(·,·)` implementation the screening stage uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimilarityConfig {
    Lexical {
        #[serde(default = "default_ngram")]
        order: usize,
    },
    Embedding {
        base_url: String,
        model_id: String,
        dimension: usize,
        /// Fall back to bigram Jaccard when the embedding backend fails.
        #[serde(default)]
        fallback_lexical: bool,
    },
}

fn default_ngram() -> usize {
    2
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig::Lexical { order: 2 }
    }
}

/// Tunables for one pipeline run. Loaded from JSON; absent fields take the
/// defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// PageRank damping factor, in (0, 1).
    pub beta: f64,
    /// Scale on reliability × consistency.
    pub lambda_weight: f64,
    pub max_iters: usize,
    pub epsilon: f64,
    pub score_threshold: f64,
    pub n_diverse: usize,
    pub n_demos: usize,
    pub seed: u64,
    pub max_concurrency: usize,
    /// Weight slot-graph edges by co-occurrence count instead of treating
    /// them as a simple graph.
    pub weighted_edges: bool,
    pub model: ModelParams,
    pub similarity: SimilarityConfig,
    /// System message sent with every completion request.
    pub system_prompt: String,
    /// Optional template file overrides; the built-in templates are used
    /// when absent.
    pub relation_template: Option<String>,
    pub extraction_template: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            beta: 0.85,
            lambda_weight: 1.0,
            max_iters: 100,
            epsilon: 1e-6,
            score_threshold: 0.3,
            n_diverse: 5,
            n_demos: 3,
            seed: 42,
            max_concurrency: 4,
            weighted_edges: false,
            model: ModelParams::default(),
            similarity: SimilarityConfig::default(),
            system_prompt: "You are an information extraction assistant.".to_string(),
            relation_template: None,
            extraction_template: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid config value: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let raw = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: Self = serde_json::from_str(&raw).map_err(|source| ConfigError::Json {
            path: path.display().to_string(),
            source,
        })?;
        config.validate()?;
        Ok(config)
    }

    // Negated comparisons so that NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return fail(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.lambda_weight >= 0.0) || !self.lambda_weight.is_finite() {
            return fail(format!("lambda_weight must be >= 0, got {}", self.lambda_weight));
        }
        if self.max_iters == 0 {
            return fail("max_iters must be positive".into());
        }
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.score_threshold) {
            return fail(format!("score_threshold must lie in [0, 1], got {}", self.score_threshold));
        }
        if self.n_diverse == 0 {
            return fail("n_diverse must be positive".into());
        }
        if self.max_concurrency == 0 {
            return fail("max_concurrency must be positive".into());
        }
        if !(self.model.temperature >= 0.0) || !(self.model.relation_temperature >= 0.0) {
            return fail("temperatures must be >= 0".into());
        }
        if self.model.max_output_chars == 0 {
            return fail("max_output_chars must be positive".into());
        }
        match &self.similarity {
            SimilarityConfig::Lexical { order } if *order == 0 => {
                return fail("lexical n-gram order must be positive".into())
            }
            SimilarityConfig::Embedding { dimension, .. } if *dimension == 0 => {
                return fail("embedding dimension must be positive".into())
            }
            _ => {}
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form of this config.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(json))
    }
}
