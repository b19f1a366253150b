//! Chat-completion gateway: one request/response contract over remote HTTP
//! backends and a scripted mock, fronted by a persistent response cache.

mod cache;
mod http;
mod mock;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cache::{CacheSummary, DiskCache};
pub use http::{HttpBackend, HttpTransport, RetryPolicy, API_KEY_ENV};
pub use mock::{MatchKind, MockBackend, MockEntry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_text: String,
    pub user_text: String,
    pub temperature: f64,
    pub max_output_chars: usize,
    pub model_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub from_cache: bool,
    pub backend_id: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("rate limited (retry after {retry_after:?})")]
    RateLimited { retry_after: Option<Duration> },
    #[error("backend refused the request (status {status}): {message}")]
    BackendRefused { status: u16, message: String },
    #[error("backend returned an unusable body: {0}")]
    InvalidResponse(String),
    #[error("mock script has no response for request {key}")]
    MockMiss { key: String },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("mock script error: {0}")]
    Script(String),
    #[error("cache I/O error: {0}")]
    Cache(#[from] std::io::Error),
}

impl GatewayError {
    /// Whether retrying the same request could plausibly succeed.
    pub fn is_transient(&self) -> bool {
        matches!(self, GatewayError::Transport { .. } | GatewayError::RateLimited { .. })
    }
}

/// A completion backend. Implementations return the raw model output.
pub trait CompletionBackend: Send + Sync {
    fn backend_id(&self) -> &str;
    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError>;
}

/// Stable content hash over every request field. Fields are length-prefixed
/// so that moving text between fields changes the key.
pub fn cache_key(request: &CompletionRequest) -> String {
    let mut hasher = Sha256::new();
    let mut field = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    };
    field(request.model_id.as_bytes());
    field(&request.temperature.to_bits().to_le_bytes());
    field(&(request.max_output_chars as u64).to_le_bytes());
    field(request.system_text.as_bytes());
    field(request.user_text.as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatewayStats {
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub backend_calls: usize,
}

/// Backend plus optional cache. Records every `(key, response)` pair it
/// serves so a run can report a hash of exactly the outputs it consumed.
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    cache: Option<DiskCache>,
    hits: AtomicUsize,
    misses: AtomicUsize,
    calls: AtomicUsize,
    transcript: Mutex<BTreeMap<String, String>>,
}

impl Gateway {
    pub fn new(backend: Arc<dyn CompletionBackend>, cache: Option<DiskCache>) -> Self {
        Self {
            backend,
            cache,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
            calls: AtomicUsize::new(0),
            transcript: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn backend_id(&self) -> &str {
        self.backend.backend_id()
    }

    pub fn complete(&self, request: &CompletionRequest) -> Result<CompletionResult, GatewayError> {
        if request.user_text.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("user_text is empty".into()));
        }
        let key = cache_key(request);
        if let Some(cache) = &self.cache {
            if let Some(text) = cache.get_text(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                self.record(&key, &text);
                return Ok(CompletionResult {
                    text,
                    from_cache: true,
                    backend_id: self.backend.backend_id().to_string(),
                });
            }
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        let text = self.backend.complete(request)?;
        let text = match &self.cache {
            Some(cache) => cache.put_completion(&key, request, &text)?,
            None => text,
        };
        self.record(&key, &text);
        Ok(CompletionResult {
            text,
            from_cache: false,
            backend_id: self.backend.backend_id().to_string(),
        })
    }

    fn record(&self, key: &str, text: &str) {
        self.transcript
            .lock()
            .expect("transcript lock")
            .insert(key.to_string(), text.to_string());
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            cache_hits: self.hits.load(Ordering::Relaxed),
            cache_misses: self.misses.load(Ordering::Relaxed),
            backend_calls: self.calls.load(Ordering::Relaxed),
        }
    }

    /// SHA-256 over the sorted `(key, response)` pairs served so far.
    pub fn transcript_hash(&self) -> String {
        let transcript = self.transcript.lock().expect("transcript lock");
        let mut hasher = Sha256::new();
        for (k, v) in transcript.iter() {
            hasher.update(k.as_bytes());
            hasher.update((v.len() as u64).to_le_bytes());
            hasher.update(v.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}
