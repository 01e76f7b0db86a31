//! The provider abstraction: everything above it sees `(prompt, params) ->
//! text`. Ships a scripted provider for tests and an HTTP chat-completion
//! provider for real endpoints.

use std::collections::VecDeque;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::json;

use super::GenerationParams;

/// A provider-level failure. `RateLimited` and `Transport` are retryable;
/// `Fatal` aborts immediately.
#[derive(Debug, Clone, thiserror::Error)]
pub enum ProviderError {
    #[error("rate limited{}", retry_after.map(|d| format!(" (retry after {d:?})")).unwrap_or_default())]
    RateLimited { retry_after: Option<Duration> },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("provider failure: {0}")]
    Fatal(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        !matches!(self, ProviderError::Fatal(_))
    }
}

/// One LLM backend. Implementations must be shareable across worker threads.
/// `model_id` routes the request on providers that serve several models.
pub trait Provider: Send + Sync {
    fn complete(
        &self,
        prompt: &str,
        model_id: &str,
        params: &GenerationParams,
    ) -> Result<String, ProviderError>;
}

/// Fixed reply sequence for tests; pops one scripted reply per call and
/// errors when exhausted.
pub struct ScriptedProvider {
    replies: Mutex<VecDeque<Result<String, ProviderError>>>,
}

impl ScriptedProvider {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(|s| Ok(s.into())).collect()),
        }
    }

    /// Script a mix of replies and errors, e.g. transport failures before a
    /// success.
    pub fn with_outcomes(outcomes: Vec<Result<String, ProviderError>>) -> Self {
        Self {
            replies: Mutex::new(outcomes.into()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("script lock").len()
    }
}

impl Provider for ScriptedProvider {
    fn complete(
        &self,
        _prompt: &str,
        _model_id: &str,
        _params: &GenerationParams,
    ) -> Result<String, ProviderError> {
        self.replies
            .lock()
            .expect("script lock")
            .pop_front()
            .unwrap_or_else(|| Err(ProviderError::Fatal("scripted replies exhausted".into())))
    }
}

/// Provider backed by a closure; handy when a test reply must depend on the
/// prompt.
pub struct FnProvider<F>(pub F);

impl<F> Provider for FnProvider<F>
where
    F: Fn(&str, &GenerationParams) -> Result<String, ProviderError> + Send + Sync,
{
    fn complete(
        &self,
        prompt: &str,
        _model_id: &str,
        params: &GenerationParams,
    ) -> Result<String, ProviderError> {
        (self.0)(prompt, params)
    }
}

/// Chat-completion endpoint over HTTPS with a JSON body. The request carries
/// the effective parameters (including the reasoning-effort temperature
/// override applied upstream).
pub struct HttpProvider {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(120))
                .build()
                .expect("http client builds"),
        }
    }

    fn body(&self, prompt: &str, model_id: &str, params: &GenerationParams) -> serde_json::Value {
        let mut body = json!({
            "model": model_id,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
            "top_p": params.top_p,
            "max_tokens": params.max_tokens,
            "frequency_penalty": params.frequency_penalty,
            "presence_penalty": params.presence_penalty,
        });
        if let Some(effort) = &params.reasoning_effort {
            body["reasoning_effort"] = json!(effort.as_str());
        }
        if let Some(seed) = params.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

impl Provider for HttpProvider {
    fn complete(
        &self,
        prompt: &str,
        model_id: &str,
        params: &GenerationParams,
    ) -> Result<String, ProviderError> {
        let mut request = self
            .client
            .post(&self.endpoint)
            .json(&self.body(prompt, model_id, params));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 {
            let retry_after = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.parse::<u64>().ok())
                .map(Duration::from_secs);
            return Err(ProviderError::RateLimited { retry_after });
        }
        if status.is_server_error() {
            return Err(ProviderError::Transport(format!("server error {status}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Fatal(format!("request rejected: {status}")));
        }
        let value: serde_json::Value = response
            .json()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.to_string())
            .ok_or_else(|| ProviderError::Fatal("response missing choices[0].message.content".into()))
    }
}

/// Counting semaphore bounding in-flight requests per provider.
#[derive(Debug)]
pub struct Limiter {
    permits: Mutex<usize>,
    available: Condvar,
}

impl Limiter {
    pub fn new(max_in_flight: usize) -> Self {
        Self {
            permits: Mutex::new(max_in_flight.max(1)),
            available: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> LimiterGuard<'_> {
        let mut permits = self.permits.lock().expect("limiter lock");
        while *permits == 0 {
            permits = self.available.wait(permits).expect("limiter wait");
        }
        *permits -= 1;
        LimiterGuard { limiter: self }
    }
}

pub struct LimiterGuard<'a> {
    limiter: &'a Limiter,
}

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.limiter.permits.lock().expect("limiter lock");
        *permits += 1;
        self.limiter.available.notify_one();
    }
}

/// Transport retry policy: exponential backoff with jitter.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
    pub jitter: bool,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 4,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(20),
            jitter: true,
        }
    }
}

impl RetryPolicy {
    /// Zero-delay policy so tests exercise the retry path without sleeping.
    pub fn immediate(max_retries: u32) -> Self {
        Self {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
            jitter: false,
        }
    }

    pub fn delay_for(&self, attempt: u32, rate_limit_hint: Option<Duration>) -> Duration {
        if let Some(hint) = rate_limit_hint {
            return hint.min(self.max_delay);
        }
        let exp = self
            .base_delay
            .saturating_mul(2u32.saturating_pow(attempt))
            .min(self.max_delay);
        if self.jitter && !exp.is_zero() {
            // +/- 25% jitter; thread-local entropy is fine for pacing.
            let nanos = exp.as_nanos() as u64;
            let jitter = rand::random::<u64>() % (nanos / 2 + 1);
            Duration::from_nanos(nanos - nanos / 4 + jitter)
        } else {
            exp
        }
    }
}
