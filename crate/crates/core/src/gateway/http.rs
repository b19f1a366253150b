//! Blocking HTTP client for OpenAI-compatible endpoints.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::{json, Value};

use super::{CompletionBackend, CompletionRequest, GatewayError};

/// Environment variable holding the bearer token.
pub const API_KEY_ENV: &str = "LLM_DER_API_KEY";

/// Longest `Retry-After` the client is willing to sleep through.
const MAX_RETRY_AFTER: Duration = Duration::from_secs(120);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }
}

/// JSON-over-HTTP POST that retries transport failures, 5xx and 429.
/// Other 4xx responses are returned immediately as `BackendRefused`.
pub struct HttpTransport {
    client: Client,
    base_url: String,
    api_key: Option<String>,
    retry: RetryPolicy,
}

impl HttpTransport {
    pub fn new(base_url: &str, api_key: Option<String>, retry: RetryPolicy, timeout: Duration) -> Result<Self, GatewayError> {
        let client = Client::builder().timeout(timeout).build().map_err(|e| GatewayError::Transport {
            attempts: 0,
            message: e.to_string(),
        })?;
        Ok(Self {
            client,
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key,
            retry,
        })
    }

    /// Reads the bearer token from [`API_KEY_ENV`].
    pub fn api_key_from_env() -> Option<String> {
        std::env::var(API_KEY_ENV).ok().filter(|k| !k.trim().is_empty())
    }

    pub fn post_json(&self, path: &str, body: &Value) -> Result<Value, GatewayError> {
        let url = format!("{}/{}", self.base_url, path.trim_start_matches('/'));
        let mut attempt = 0u32;
        loop {
            attempt += 1;
            let mut builder = self.client.post(&url).json(body);
            if let Some(key) = &self.api_key {
                builder = builder.bearer_auth(key);
            }
            let failure = match builder.send() {
                Err(e) => GatewayError::Transport {
                    attempts: attempt,
                    message: e.to_string(),
                },
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp
                            .json::<Value>()
                            .map_err(|e| GatewayError::InvalidResponse(e.to_string()));
                    }
                    if status == StatusCode::TOO_MANY_REQUESTS {
                        let retry_after = resp
                            .headers()
                            .get(reqwest::header::RETRY_AFTER)
                            .and_then(|v| v.to_str().ok())
                            .and_then(|v| v.trim().parse::<f64>().ok())
                            .filter(|s| s.is_finite() && *s >= 0.0)
                            .map(Duration::from_secs_f64);
                        GatewayError::RateLimited { retry_after }
                    } else if status.is_server_error() {
                        GatewayError::Transport {
                            attempts: attempt,
                            message: format!("HTTP {status}: {}", resp.text().unwrap_or_default()),
                        }
                    } else {
                        return Err(GatewayError::BackendRefused {
                            status: status.as_u16(),
                            message: resp.text().unwrap_or_default(),
                        });
                    }
                }
            };
            if attempt > self.retry.max_retries {
                return Err(failure);
            }
            let backoff = self.retry.initial_backoff * 2u32.saturating_pow(attempt - 1);
            let wait = match &failure {
                GatewayError::RateLimited { retry_after: Some(d) } => (*d).min(MAX_RETRY_AFTER),
                _ => backoff,
            };
            log::warn!("{url}: {failure}; retrying in {wait:?}");
            std::thread::sleep(wait);
        }
    }
}

/// Chat-completion backend (`POST {base}/chat/completions`).
pub struct HttpBackend {
    transport: HttpTransport,
    id: String,
}

impl HttpBackend {
    pub fn new(transport: HttpTransport) -> Self {
        let id = format!("http:{}", transport.base_url);
        Self { transport, id }
    }
}

impl CompletionBackend for HttpBackend {
    fn backend_id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let mut messages = Vec::new();
        if !request.system_text.is_empty() {
            messages.push(json!({"role": "system", "content": request.system_text}));
        }
        messages.push(json!({"role": "user", "content": request.user_text}));
        let body = json!({
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            // One token covers at least one character, so this never
            // truncates below the character budget.
            "max_tokens": request.max_output_chars,
        });
        let resp = self.transport.post_json("chat/completions", &body)?;
        resp.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| GatewayError::InvalidResponse(format!("no choices[0].message.content in {resp}")))
    }
}
