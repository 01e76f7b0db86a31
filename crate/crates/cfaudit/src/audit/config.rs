//! Audit configuration: a TOML file plus flag overrides. Credentials come
//! only from environment variables named in the provider configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::counterfactual::ValidationScope;
use crate::gateway::{GenerationParams, ModelSpec, PromptMode};
use crate::taxonomy::DimensionName;

use super::AuditError;

/// One provider entry in the provider configuration file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProviderDecl {
    pub name: String,
    pub kind: ProviderKind,
    #[serde(default)]
    pub endpoint: Option<String>,
    /// Environment variable holding the API credential (http providers).
    #[serde(default)]
    pub credential_env: Option<String>,
    #[serde(default)]
    pub flip_probability: Option<f64>,
    #[serde(default)]
    pub score_jitter: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub replies: Option<Vec<String>>,
    #[serde(default)]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// Chat-completion endpoint over HTTPS.
    Http,
    /// Deterministic mock keyed by (source transcript, question).
    InstanceKeyed,
    /// Deterministic mock keyed by the full prompt.
    PromptHash,
    /// Seeded stochastic mock (judgment flips + score jitter).
    Stochastic,
    /// Fixed reply sequence.
    Scripted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDecl {
    pub model_id: String,
    pub provider: String,
    #[serde(default)]
    pub params: GenerationParams,
}

impl ModelDecl {
    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            model_id: self.model_id.clone(),
            provider: self.provider.clone(),
            params: self.params.clone(),
        }
    }
}

/// The provider configuration file: providers plus per-model parameters.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProvidersConfig {
    #[serde(default)]
    pub providers: Vec<ProviderDecl>,
    #[serde(default)]
    pub models: Vec<ModelDecl>,
}

impl ProvidersConfig {
    pub fn load(path: &Path) -> Result<Self, AuditError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            AuditError::Config(format!("cannot read providers file {}: {e}", path.display()))
        })?;
        toml::from_str(&raw).map_err(|e| {
            AuditError::Config(format!("providers file {}: {e}", path.display()))
        })
    }

    pub fn model(&self, model_id: &str) -> Result<ModelSpec, AuditError> {
        self.models
            .iter()
            .find(|m| m.model_id == model_id)
            .map(ModelDecl::to_spec)
            .ok_or_else(|| {
                AuditError::Config(format!("model {model_id:?} not declared in providers file"))
            })
    }

    pub fn provider(&self, name: &str) -> Result<&ProviderDecl, AuditError> {
        self.providers
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| AuditError::Config(format!("provider {name:?} not declared")))
    }
}

fn default_k() -> u32 {
    3
}
fn default_retries() -> u32 {
    4
}
fn default_concurrency() -> usize {
    4
}
fn default_cache() -> bool {
    true
}

/// On-disk audit configuration. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditConfig {
    pub corpus: PathBuf,
    pub questions: PathBuf,
    #[serde(default)]
    pub gold_labels: Option<PathBuf>,
    pub providers: PathBuf,
    #[serde(default)]
    pub pools: Option<PathBuf>,
    #[serde(default)]
    pub prompt_dir: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Dimension-strategy names; empty means the full registry.
    #[serde(default)]
    pub dimensions: Vec<String>,
    /// Evaluated model ids (must be declared in the providers file).
    pub models: Vec<String>,
    #[serde(default = "PromptMode::standard")]
    pub prompt_mode: PromptMode,
    #[serde(default = "default_k")]
    pub robustness_k: u32,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default)]
    pub seed: u64,
    pub identifier_model: String,
    #[serde(default)]
    pub generator_model: Option<String>,
    pub validator_model: String,
    #[serde(default)]
    pub validation_scope: ValidationScope,
    #[serde(default = "default_cache")]
    pub cache: bool,
    #[serde(default)]
    pub run_id: Option<String>,
    /// RFC3339 timestamp recorded in the manifest; omitted means "now".
    /// Pinning it makes whole report directories reproducible.
    #[serde(default)]
    pub timestamp: Option<String>,
}

impl PromptMode {
    fn standard() -> Self {
        PromptMode::Standard
    }
}

impl AuditConfig {
    pub fn load(path: &Path) -> Result<Self, AuditError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            AuditError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: AuditConfig = toml::from_str(&raw)
            .map_err(|e| AuditError::Config(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut self.corpus);
        resolve(&mut self.questions);
        resolve(&mut self.providers);
        resolve(&mut self.out_dir);
        if let Some(p) = &mut self.gold_labels {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut self.pools {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = &mut self.prompt_dir {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Selected dimension-strategies in registry order.
    pub fn selected_dimensions(&self) -> Result<Vec<DimensionName>, AuditError> {
        if self.dimensions.is_empty() {
            return Ok(DimensionName::ALL.to_vec());
        }
        let mut selected = Vec::new();
        for raw in &self.dimensions {
            let dim = DimensionName::parse(raw).ok_or_else(|| {
                AuditError::Config(format!(
                    "unknown dimension {raw:?}; valid names: {}",
                    DimensionName::ALL
                        .iter()
                        .map(|d| d.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                ))
            })?;
            if !selected.contains(&dim) {
                selected.push(dim);
            }
        }
        // Registry order keeps reports stable regardless of flag order.
        Ok(DimensionName::ALL
            .iter()
            .copied()
            .filter(|d| selected.contains(d))
            .collect())
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        if self.robustness_k < 2 {
            return Err(AuditError::Config(format!(
                "robustness_k must be >= 2, got {}",
                self.robustness_k
            )));
        }
        if self.models.is_empty() {
            return Err(AuditError::Config("no models selected".into()));
        }
        self.selected_dimensions()?;
        Ok(())
    }

    pub fn generator_model_id(&self) -> &str {
        self.generator_model.as_deref().unwrap_or(&self.identifier_model)
    }

    pub fn variant_store_path(&self) -> PathBuf {
        self.out_dir.join("variants.jsonl")
    }

    pub fn stats_path(&self) -> PathBuf {
        self.out_dir.join("generation_stats.json")
    }

    pub fn record_store_path(&self) -> PathBuf {
        self.out_dir.join("records.jsonl")
    }

    pub fn evaluate_meta_path(&self) -> PathBuf {
        self.out_dir.join("evaluate_meta.json")
    }

    pub fn baseline_store_path(&self) -> PathBuf {
        self.out_dir.join("baseline.jsonl")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out_dir.join("report")
    }

    pub fn review_dir(&self) -> PathBuf {
        self.out_dir.join("review")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.out_dir.join("cache")
    }
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub corpus: Option<PathBuf>,
    pub dimensions: Option<Vec<String>>,
    pub models: Option<Vec<String>>,
    pub prompt_mode: Option<PromptMode>,
    pub robustness_k: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub max_concurrency: Option<usize>,
}

impl ConfigOverrides {
    pub fn apply(&self, config: &mut AuditConfig) {
        if let Some(corpus) = &self.corpus {
            config.corpus = corpus.clone();
        }
        if let Some(dimensions) = &self.dimensions {
            config.dimensions = dimensions.clone();
        }
        if let Some(models) = &self.models {
            config.models = models.clone();
        }
        if let Some(mode) = self.prompt_mode {
            config.prompt_mode = mode;
        }
        if let Some(k) = self.robustness_k {
            config.robustness_k = k;
        }
        if let Some(out) = &self.out_dir {
            config.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(c) = self.max_concurrency {
            config.max_concurrency = c;
        }
    }
}
