//! Semantic similarity used by the consistency check: a remote embedding
//! provider and an offline character n-gram Jaccard provider.

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{PipelineConfig, SimilarityConfig};
use crate::gateway::{DiskCache, GatewayError, HttpTransport, RetryPolicy};

#[derive(Debug, thiserror::Error)]
pub enum SimilarityError {
    #[error("vectors have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("cannot take the cosine of a zero or empty vector")]
    ZeroVector,
    #[error("embedding backend: {0}")]
    Backend(#[from] GatewayError),
    #[error("embedding has dimension {got}, expected {expected}")]
    WrongDimension { got: usize, expected: usize },
    #[error("embedding cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// `Sim(a, b)` in `[0, 1]`. Implementations must be symmetric and return 1
/// for identical non-empty inputs.
pub trait SimilarityProvider: Send + Sync {
    fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError>;
}

/// `dot(u, v) / (|u| |v|)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::DimensionMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if u.is_empty() || nu == 0.0 || nv == 0.0 {
        return Err(SimilarityError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Character n-gram Jaccard. Strings shorter than `order` contribute a single
/// gram made of the whole string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LexicalSimilarity {
    pub order: usize,
}

impl Default for LexicalSimilarity {
    fn default() -> Self {
        Self { order: 2 }
    }
}

impl LexicalSimilarity {
    pub fn grams(&self, s: &str) -> HashSet<String> {
        let chars: Vec<char> = s.chars().collect();
        if chars.is_empty() {
            return HashSet::new();
        }
        let n = self.order.clamp(1, chars.len());
        chars.windows(n).map(|w| w.iter().collect()).collect()
    }

    pub fn jaccard(&self, a: &str, b: &str) -> f64 {
        let ga = self.grams(a);
        let gb = self.grams(b);
        let union = ga.union(&gb).count();
        if union == 0 {
            return 0.0;
        }
        ga.intersection(&gb).count() as f64 / union as f64
    }
}

impl SimilarityProvider for LexicalSimilarity {
    fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        Ok(self.jaccard(a, b))
    }
}

/// Text → vector.
pub trait EmbeddingBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn embed(&self, text: &str) -> Result<Vec<f64>, SimilarityError>;
}

/// OpenAI-compatible `POST {base}/embeddings`.
pub struct HttpEmbeddingBackend {
    transport: HttpTransport,
    model_id: String,
}

impl HttpEmbeddingBackend {
    pub fn new(transport: HttpTransport, model_id: impl Into<String>) -> Self {
        Self {
            transport,
            model_id: model_id.into(),
        }
    }
}

impl EmbeddingBackend for HttpEmbeddingBackend {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, SimilarityError> {
        let resp = self
            .transport
            .post_json("embeddings", &json!({"model": self.model_id, "input": text}))?;
        let arr = resp
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| GatewayError::InvalidResponse("no data[0].embedding".into()))?;
        arr.iter()
            .map(|x| {
                x.as_f64()
                    .ok_or_else(|| GatewayError::InvalidResponse("non-numeric embedding component".into()).into())
            })
            .collect()
    }
}

/// Cosine of embeddings, clamped to `[0, 1]` with `max(0, ·)`.
pub struct EmbeddingSimilarity {
    backend: Arc<dyn EmbeddingBackend>,
    dimension: usize,
    cache: Option<DiskCache>,
}

impl EmbeddingSimilarity {
    pub fn new(backend: Arc<dyn EmbeddingBackend>, dimension: usize, cache: Option<DiskCache>) -> Self {
        Self {
            backend,
            dimension,
            cache,
        }
    }

    fn cache_key(&self, text: &str) -> String {
        let mut h = Sha256::new();
        h.update((self.backend.model_id().len() as u64).to_le_bytes());
        h.update(self.backend.model_id().as_bytes());
        h.update(text.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn embedding(&self, text: &str) -> Result<Vec<f64>, SimilarityError> {
        let key = self.cache_key(text);
        if let Some(v) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            if let Ok(vec) = serde_json::from_value::<Vec<f64>>(v) {
                if vec.len() == self.dimension {
                    return Ok(vec);
                }
            }
        }
        let vec = self.backend.embed(text)?;
        if vec.len() != self.dimension {
            return Err(SimilarityError::WrongDimension {
                got: vec.len(),
                expected: self.dimension,
            });
        }
        if let Some(cache) = &self.cache {
            let meta = json!({"model_id": self.backend.model_id(), "text": text});
            cache.put(&key, json!(vec), Some(meta))?;
        }
        Ok(vec)
    }
}

impl SimilarityProvider for EmbeddingSimilarity {
    fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        if a == b && !a.is_empty() {
            return Ok(1.0);
        }
        let c = cosine(&self.embedding(a)?, &self.embedding(b)?)?;
        Ok(c.clamp(0.0, 1.0))
    }
}

/// Tries `primary`, and on error logs and uses `fallback`.
pub struct FallbackSimilarity<P, F> {
    pub primary: P,
    pub fallback: F,
}

impl<P: SimilarityProvider, F: SimilarityProvider> SimilarityProvider for FallbackSimilarity<P, F> {
    fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        self.primary.similarity(a, b).or_else(|e| {
            log::warn!("similarity provider failed ({e}); using fallback");
            self.fallback.similarity(a, b)
        })
    }
}

/// Builds the provider selected by `config.similarity`. Embedding caches live
/// under `cache_dir` when one is given.
pub fn provider_from_config(
    config: &PipelineConfig,
    cache_dir: Option<&std::path::Path>,
) -> Result<Box<dyn SimilarityProvider>, SimilarityError> {
    match &config.similarity {
        SimilarityConfig::Lexical { order } => Ok(Box::new(LexicalSimilarity { order: *order })),
        SimilarityConfig::Embedding {
            base_url,
            model_id,
            dimension,
            fallback_lexical,
        } => {
            let transport = HttpTransport::new(
                base_url,
                HttpTransport::api_key_from_env(),
                RetryPolicy {
                    max_retries: config.model.max_retries,
                    initial_backoff: Duration::from_millis(config.model.initial_backoff_ms),
                },
                Duration::from_secs(config.model.timeout_secs),
            )?;
            let cache = cache_dir.map(DiskCache::open_embeddings).transpose()?;
            let embedding = EmbeddingSimilarity::new(
                Arc::new(HttpEmbeddingBackend::new(transport, model_id.clone())),
                *dimension,
                cache,
            );
            if *fallback_lexical {
                Ok(Box::new(FallbackSimilarity {
                    primary: embedding,
                    fallback: LexicalSimilarity::default(),
                }))
            } else {
                Ok(Box::new(embedding))
            }
        }
    }
}
