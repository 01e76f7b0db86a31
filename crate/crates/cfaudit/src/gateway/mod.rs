//! Provider-agnostic LLM access: prompt templating, generation-parameter
//! control, typed response parsing, a persistent response cache, transport
//! retries, and per-provider concurrency limits. Deterministic mock
//! providers are first-class citizens so whole audits can run offline.

pub mod cache;
pub mod mock;
pub mod parse;
pub mod prompts;
pub mod provider;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Answer, QaQuestion, Transcript};
use cache::{CacheEntry, DiskCache};
use parse::{parse_coaching_reply, parse_qa_reply, ParseFailure};
use prompts::{render_sub_criteria, render_transcript, PromptSet, TemplateId};
use provider::{Limiter, Provider, ProviderError, RetryPolicy};

/// Reasoning-effort setting for models that support it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningEffort {
    Low,
    Medium,
}

impl ReasoningEffort {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReasoningEffort::Low => "low",
            ReasoningEffort::Medium => "medium",
        }
    }
}

/// Generation parameters sent with every request. Defaults pin the uniform
/// evaluation settings: temperature 0, top-p 1.0, 1000 max tokens, neutral
/// penalties, no stop sequence, no seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub frequency_penalty: f64,
    pub presence_penalty: f64,
    pub reasoning_effort: Option<ReasoningEffort>,
    pub seed: Option<u64>,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: 1000,
            frequency_penalty: 0.0,
            presence_penalty: 0.0,
            reasoning_effort: None,
            seed: None,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_tokens < 1 {
            return Err(GatewayError::Precondition("max_tokens must be >= 1".into()));
        }
        if self.temperature < 0.0 {
            return Err(GatewayError::Precondition("temperature must be >= 0".into()));
        }
        Ok(())
    }

    /// Canonical string folded into cache keys; stable across runs and
    /// platforms.
    pub fn canonical(&self) -> String {
        format!(
            "t={:.4};p={:.4};mt={};fp={:.4};pp={:.4};re={};seed={}",
            self.temperature,
            self.top_p,
            self.max_tokens,
            self.frequency_penalty,
            self.presence_penalty,
            self.reasoning_effort.map(|e| e.as_str()).unwrap_or("none"),
            self.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into()),
        )
    }
}

/// A model reachable through a named provider, with its request parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model_id: String,
    pub provider: String,
    #[serde(default)]
    pub params: GenerationParams,
}

impl ModelSpec {
    pub fn new(model_id: impl Into<String>, provider: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            provider: provider.into(),
            params: GenerationParams::default(),
        }
    }

    /// Effective request parameters. Models driven by `reasoning_effort` do
    /// not accept temperature adjustments, so setting it forces temperature
    /// to 1 at request build time.
    pub fn request_params(&self) -> GenerationParams {
        let mut params = self.params.clone();
        if params.reasoning_effort.is_some() {
            params.temperature = 1.0;
        }
        params
    }
}

/// Whether evaluation prompts carry the bias-aware system preamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Standard,
    Fairness,
}

impl PromptMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PromptMode::Standard => "standard",
            PromptMode::Fairness => "fairness",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.to_ascii_lowercase().as_str() {
            "standard" => Some(PromptMode::Standard),
            "fairness" => Some(PromptMode::Fairness),
            _ => None,
        }
    }
}

/// Content address of one request: digest over model, rendered prompt,
/// parameters and the prompt-variant tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn compute(model_id: &str, params_canonical: &str, prompt: &str, tag: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(model_id.as_bytes());
        hasher.update([0x1f]);
        hasher.update(tag.as_bytes());
        hasher.update([0x1f]);
        hasher.update(params_canonical.as_bytes());
        hasher.update([0x1f]);
        hasher.update(prompt.as_bytes());
        Self(hex::encode(hasher.finalize()))
    }

    pub fn digest(&self) -> &str {
        &self.0
    }
}

/// Parsed Auto-QA result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaResult {
    pub judgment: Answer,
    pub confidence: u8,
    pub rationale: String,
    pub raw: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoachingKind {
    Positives,
    Improvements,
}

impl CoachingKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoachingKind::Positives => "positives",
            CoachingKind::Improvements => "improvements",
        }
    }
}

/// Parsed coaching result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoachingResult {
    pub analysis: String,
    pub score: u8,
    pub kind: CoachingKind,
    pub raw: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("unknown provider {0:?}")]
    UnknownProvider(String),
    #[error("provider {provider} exhausted after {attempts} attempts: {last}")]
    Exhausted {
        provider: String,
        attempts: u32,
        last: ProviderError,
    },
    #[error("provider failure: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Parse(#[from] ParseFailure),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cache io: {0}")]
    CacheIo(#[from] std::io::Error),
}

struct ProviderHandle {
    provider: Arc<dyn Provider>,
    limiter: Limiter,
}

/// The shared LLM access layer. Callers never coordinate among themselves:
/// the gateway serializes cache writes and bounds in-flight requests per
/// provider.
pub struct Gateway {
    providers: HashMap<String, ProviderHandle>,
    cache: Option<DiskCache>,
    retry: RetryPolicy,
    prompts: PromptSet,
}

impl Gateway {
    pub fn builder() -> GatewayBuilder {
        GatewayBuilder::default()
    }

    pub fn prompts(&self) -> &PromptSet {
        &self.prompts
    }

    fn handle(&self, provider: &str) -> Result<&ProviderHandle, GatewayError> {
        self.providers
            .get(provider)
            .ok_or_else(|| GatewayError::UnknownProvider(provider.to_string()))
    }

    fn call_with_retries(
        &self,
        handle: &ProviderHandle,
        provider_name: &str,
        prompt: &str,
        model_id: &str,
        params: &GenerationParams,
    ) -> Result<String, GatewayError> {
        let mut attempts = 0;
        loop {
            let outcome = {
                let _permit = handle.limiter.acquire();
                handle.provider.complete(prompt, model_id, params)
            };
            match outcome {
                Ok(text) => return Ok(text),
                Err(err) if err.is_retryable() && attempts < self.retry.max_retries => {
                    let hint = match &err {
                        ProviderError::RateLimited { retry_after } => *retry_after,
                        _ => None,
                    };
                    let delay = self.retry.delay_for(attempts, hint);
                    log::warn!(
                        "provider {provider_name} attempt {} failed ({err}); retrying in {delay:?}",
                        attempts + 1
                    );
                    if !delay.is_zero() {
                        std::thread::sleep(delay);
                    }
                    attempts += 1;
                }
                Err(err) => {
                    return Err(GatewayError::Exhausted {
                        provider: provider_name.to_string(),
                        attempts: attempts + 1,
                        last: err,
                    });
                }
            }
        }
    }

    /// Cache-first completion. On a miss the provider is called once (with
    /// bounded transport retries) and the response persisted.
    pub fn complete(
        &self,
        prompt: &str,
        model: &ModelSpec,
        tag: &str,
    ) -> Result<String, GatewayError> {
        if prompt.is_empty() {
            return Err(GatewayError::Precondition("prompt must be non-empty".into()));
        }
        let params = model.request_params();
        params.validate()?;
        let key = CacheKey::compute(&model.model_id, &params.canonical(), prompt, tag);
        if let Some(cache) = &self.cache {
            if let Some(hit) = cache.get(&key) {
                return Ok(hit);
            }
        }
        let handle = self.handle(&model.provider)?;
        let response =
            self.call_with_retries(handle, &model.provider, prompt, &model.model_id, &params)?;
        if let Some(cache) = &self.cache {
            cache.put(
                &key,
                &CacheEntry {
                    model_id: model.model_id.clone(),
                    tag: tag.to_string(),
                    params: params.canonical(),
                    prompt: prompt.to_string(),
                    response: response.clone(),
                },
            )?;
        }
        Ok(response)
    }

    /// Completion that never consults or fills the cache; used wherever
    /// responses must be independent samples (robustness repeats, variant
    /// generation retries).
    pub fn complete_uncached(
        &self,
        prompt: &str,
        model: &ModelSpec,
    ) -> Result<String, GatewayError> {
        if prompt.is_empty() {
            return Err(GatewayError::Precondition("prompt must be non-empty".into()));
        }
        let params = model.request_params();
        params.validate()?;
        let handle = self.handle(&model.provider)?;
        self.call_with_retries(handle, &model.provider, prompt, &model.model_id, &params)
    }

    /// Render the Auto-QA prompt for one (transcript, question, mode). The
    /// rendering depends only on these inputs, never on the model, so every
    /// model in a run sees identical prompts per instance.
    pub fn render_qa_prompt(
        &self,
        transcript: &Transcript,
        question: &QaQuestion,
        mode: PromptMode,
    ) -> String {
        let body = self.prompts.render(
            TemplateId::QaEvaluation,
            &[
                ("question", &question.text),
                ("sub_criteria", &render_sub_criteria(question)),
                ("transcript", &render_transcript(transcript)),
            ],
        );
        match mode {
            PromptMode::Standard => body,
            PromptMode::Fairness => format!(
                "{}\n\n{}",
                self.prompts.render(TemplateId::FairnessSystemQa, &[]),
                body
            ),
        }
    }

    pub fn render_coaching_prompt(
        &self,
        transcript: &Transcript,
        kind: CoachingKind,
        mode: PromptMode,
    ) -> String {
        let template = match kind {
            CoachingKind::Positives => TemplateId::CoachingPositives,
            CoachingKind::Improvements => TemplateId::CoachingImprovements,
        };
        let body = self.prompts.render(
            template,
            &[("transcript", &render_transcript(transcript))],
        );
        match mode {
            PromptMode::Standard => body,
            PromptMode::Fairness => format!(
                "{}\n\n{}",
                self.prompts.render(TemplateId::FairnessSystemCoaching, &[]),
                body
            ),
        }
    }

    /// Ask one rubric question about a transcript and parse the reply. The
    /// raw text is retained on the result for audit.
    pub fn evaluate_qa(
        &self,
        transcript: &Transcript,
        question: &QaQuestion,
        model: &ModelSpec,
        mode: PromptMode,
    ) -> Result<QaResult, GatewayError> {
        let prompt = self.render_qa_prompt(transcript, question, mode);
        let raw = self.complete(&prompt, model, mode.as_str())?;
        let parsed = parse_qa_reply(&raw)?;
        Ok(QaResult {
            judgment: parsed.judgment,
            confidence: parsed.confidence,
            rationale: parsed.rationale,
            raw,
        })
    }

    /// Generate a coaching note (positives or improvements) and parse the
    /// structured reply.
    pub fn coach(
        &self,
        transcript: &Transcript,
        model: &ModelSpec,
        kind: CoachingKind,
        mode: PromptMode,
    ) -> Result<CoachingResult, GatewayError> {
        let prompt = self.render_coaching_prompt(transcript, kind, mode);
        let raw = self.complete(&prompt, model, mode.as_str())?;
        let parsed = parse_coaching_reply(&raw)?;
        Ok(CoachingResult {
            analysis: parsed.analysis,
            score: parsed.score,
            kind,
            raw,
        })
    }

    /// `k` independent evaluations of the same prompt, in call order, with
    /// caching disabled by construction.
    pub fn repeat_evaluate(
        &self,
        transcript: &Transcript,
        question: &QaQuestion,
        model: &ModelSpec,
        mode: PromptMode,
        k: u32,
    ) -> Result<Vec<QaResult>, GatewayError> {
        if k < 2 {
            return Err(GatewayError::Precondition(format!(
                "repeat_evaluate needs k >= 2, got {k}"
            )));
        }
        let prompt = self.render_qa_prompt(transcript, question, mode);
        let mut results = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let raw = self.complete_uncached(&prompt, model)?;
            let parsed = parse_qa_reply(&raw)?;
            results.push(QaResult {
                judgment: parsed.judgment,
                confidence: parsed.confidence,
                rationale: parsed.rationale,
                raw,
            });
        }
        Ok(results)
    }

    /// `k` independent coaching generations, mirroring `repeat_evaluate`.
    pub fn repeat_coach(
        &self,
        transcript: &Transcript,
        model: &ModelSpec,
        kind: CoachingKind,
        mode: PromptMode,
        k: u32,
    ) -> Result<Vec<CoachingResult>, GatewayError> {
        if k < 2 {
            return Err(GatewayError::Precondition(format!(
                "repeat_coach needs k >= 2, got {k}"
            )));
        }
        let prompt = self.render_coaching_prompt(transcript, kind, mode);
        let mut results = Vec::with_capacity(k as usize);
        for _ in 0..k {
            let raw = self.complete_uncached(&prompt, model)?;
            let parsed = parse_coaching_reply(&raw)?;
            results.push(CoachingResult {
                analysis: parsed.analysis,
                score: parsed.score,
                kind,
                raw,
            });
        }
        Ok(results)
    }
}

#[derive(Default)]
pub struct GatewayBuilder {
    providers: HashMap<String, (Arc<dyn Provider>, usize)>,
    cache_dir: Option<std::path::PathBuf>,
    retry: Option<RetryPolicy>,
    prompts: Option<PromptSet>,
    default_concurrency: Option<usize>,
}

impl GatewayBuilder {
    pub fn provider(mut self, name: impl Into<String>, provider: Arc<dyn Provider>) -> Self {
        let limit = self.default_concurrency.unwrap_or(4);
        self.providers.insert(name.into(), (provider, limit));
        self
    }

    pub fn provider_with_limit(
        mut self,
        name: impl Into<String>,
        provider: Arc<dyn Provider>,
        max_in_flight: usize,
    ) -> Self {
        self.providers.insert(name.into(), (provider, max_in_flight));
        self
    }

    pub fn default_concurrency(mut self, limit: usize) -> Self {
        self.default_concurrency = Some(limit);
        for (_, slot) in self.providers.values_mut() {
            *slot = limit;
        }
        self
    }

    pub fn cache_dir(mut self, dir: impl Into<std::path::PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    pub fn retry(mut self, policy: RetryPolicy) -> Self {
        self.retry = Some(policy);
        self
    }

    pub fn prompts(mut self, prompts: PromptSet) -> Self {
        self.prompts = Some(prompts);
        self
    }

    pub fn build(self) -> Result<Gateway, GatewayError> {
        let cache = match self.cache_dir {
            Some(dir) => Some(DiskCache::open(dir)?),
            None => None,
        };
        Ok(Gateway {
            providers: self
                .providers
                .into_iter()
                .map(|(name, (provider, limit))| {
                    (
                        name,
                        ProviderHandle {
                            provider,
                            limiter: Limiter::new(limit),
                        },
                    )
                })
                .collect(),
            cache,
            retry: self.retry.unwrap_or_default(),
            prompts: self.prompts.unwrap_or_default(),
        })
    }
}
