//! End-to-end audit orchestration: the four resumable pipeline stages
//! (generate, evaluate, baseline, score) behind both the library API and
//! the thin CLI. Work fans out to a bounded worker pool; results are
//! sorted before writing so reruns with seeded mocks are byte-stable.

pub mod config;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{self, CorpusError, QaQuestion, Transcript};
use crate::counterfactual::{
    self, generate_dimension_variants, load_variant_store, render_review_diff, save_variant_store,
    CounterfactualVariant, GenerationConfig, GenerationError, GenerationModels, RejectionStats,
};
use crate::gateway::mock::{InstanceIndex, JudgmentPolicy, MockEvaluator};
use crate::gateway::prompts::{render_transcript, PromptSet};
use crate::gateway::provider::{HttpProvider, Provider, RetryPolicy, ScriptedProvider};
use crate::gateway::{CoachingKind, Gateway, GatewayError, ModelSpec, PromptMode};
use crate::metrics::{
    self, accuracy, dimension_score, load_record_store, load_repeat_store, prompting_delta,
    robustness, save_record_store, save_repeat_store, EvaluationRecord, MetricsError,
    RepeatRecord,
};
use crate::report::{export_run, RunManifest, ScoreDocument};
use crate::taxonomy::{self, AttributePools, DimensionName, TaxonomyError};

pub use config::{AuditConfig, ConfigOverrides, ModelDecl, ProviderDecl, ProviderKind, ProvidersConfig};

/// Top-level audit failure, carrying the CLI exit-code convention:
/// 1 configuration/input, 2 provider exhaustion, 3 internal invariant.
#[derive(Debug, thiserror::Error)]
pub enum AuditError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("provider error: {0}")]
    Provider(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl AuditError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Config(_) | AuditError::Input(_) => 1,
            AuditError::Provider(_) => 2,
            AuditError::Internal(_) => 3,
        }
    }
}

impl From<CorpusError> for AuditError {
    fn from(e: CorpusError) -> Self {
        AuditError::Input(e.to_string())
    }
}

impl From<TaxonomyError> for AuditError {
    fn from(e: TaxonomyError) -> Self {
        AuditError::Config(e.to_string())
    }
}

impl From<GatewayError> for AuditError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::Exhausted { .. } | GatewayError::Provider(_) => {
                AuditError::Provider(e.to_string())
            }
            GatewayError::UnknownProvider(_) | GatewayError::Precondition(_) => {
                AuditError::Config(e.to_string())
            }
            other => AuditError::Internal(other.to_string()),
        }
    }
}

impl From<GenerationError> for AuditError {
    fn from(e: GenerationError) -> Self {
        match e {
            GenerationError::Gateway(g) => g.into(),
            GenerationError::Taxonomy(t) => t.into(),
            GenerationError::Store(msg) => AuditError::Internal(msg),
            other => AuditError::Provider(other.to_string()),
        }
    }
}

impl From<MetricsError> for AuditError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::DuplicateRecord { .. } => AuditError::Internal(e.to_string()),
            other => AuditError::Input(other.to_string()),
        }
    }
}

impl From<crate::report::ReportError> for AuditError {
    fn from(e: crate::report::ReportError) -> Self {
        AuditError::Input(e.to_string())
    }
}

/// Order-preserving bounded parallel map. Results come back in input order
/// regardless of worker scheduling.
fn parallel_map<T, R, F>(items: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send + Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    let workers = workers.max(1).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, R)>> = Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= items.len() {
                    break;
                }
                let result = f(&items[index]);
                results.lock().expect("results lock").push((index, result));
            });
        }
    });
    let mut results = results.into_inner().expect("results lock");
    results.sort_by_key(|(index, _)| *index);
    results.into_iter().map(|(_, r)| r).collect()
}

fn build_provider(
    decl: &ProviderDecl,
    index: Option<&Arc<InstanceIndex>>,
) -> Result<Arc<dyn Provider>, AuditError> {
    Ok(match decl.kind {
        ProviderKind::Http => {
            let endpoint = decl.endpoint.clone().ok_or_else(|| {
                AuditError::Config(format!("http provider {} needs an endpoint", decl.name))
            })?;
            let key = decl
                .credential_env
                .as_ref()
                .and_then(|var| std::env::var(var).ok());
            Arc::new(HttpProvider::new(endpoint, key))
        }
        ProviderKind::InstanceKeyed => {
            let index = index.ok_or_else(|| {
                AuditError::Config(format!(
                    "instance_keyed provider {} needs corpus context",
                    decl.name
                ))
            })?;
            Arc::new(MockEvaluator::by_instance(Arc::clone(index)))
        }
        ProviderKind::PromptHash => Arc::new(MockEvaluator::by_prompt()),
        ProviderKind::Stochastic => Arc::new(MockEvaluator::new(JudgmentPolicy::stochastic(
            decl.flip_probability.unwrap_or(0.1),
            decl.score_jitter.unwrap_or(0.0),
            decl.seed.unwrap_or(0),
        ))),
        ProviderKind::Scripted => Arc::new(ScriptedProvider::new(
            decl.replies.clone().unwrap_or_default(),
        )),
    })
}

/// Build a gateway serving every model the run needs.
fn build_gateway(
    config: &AuditConfig,
    providers: &ProvidersConfig,
    model_ids: &[String],
    index: Option<&Arc<InstanceIndex>>,
    with_cache: bool,
) -> Result<Gateway, AuditError> {
    let mut needed: BTreeSet<String> = BTreeSet::new();
    for model_id in model_ids {
        needed.insert(providers.model(model_id)?.provider);
    }
    let prompts = match &config.prompt_dir {
        Some(dir) => PromptSet::from_dir(dir)
            .map_err(|e| AuditError::Config(format!("prompt dir {}: {e}", dir.display())))?,
        None => PromptSet::builtin(),
    };
    let mut builder = Gateway::builder()
        .retry(RetryPolicy {
            max_retries: config.max_retries,
            ..RetryPolicy::default()
        })
        .prompts(prompts);
    for name in needed {
        let decl = providers.provider(&name)?;
        let provider = build_provider(decl, index)?;
        builder = builder.provider_with_limit(
            name,
            provider,
            decl.max_in_flight.unwrap_or(config.max_concurrency),
        );
    }
    if with_cache && config.cache {
        builder = builder.cache_dir(config.cache_dir());
    }
    builder.build().map_err(AuditError::from)
}

fn load_pools(config: &AuditConfig) -> Result<AttributePools, AuditError> {
    let pools = match &config.pools {
        Some(path) => AttributePools::load(path)?,
        None => AttributePools::builtin(),
    };
    pools.validate(&taxonomy::dimensions())?;
    Ok(pools)
}

fn selected_registry(config: &AuditConfig) -> Result<Vec<taxonomy::FairnessDimension>, AuditError> {
    let selected = config.selected_dimensions()?;
    Ok(taxonomy::dimensions()
        .into_iter()
        .filter(|d| selected.contains(&d.name))
        .collect())
}

fn corpus_index(corpus: &[Transcript], variants: &[CounterfactualVariant]) -> Arc<InstanceIndex> {
    let mut index = InstanceIndex::new();
    for transcript in corpus {
        index.insert(render_transcript(transcript), transcript.id.clone());
    }
    for variant in variants {
        index.insert(render_transcript(&variant.transcript), variant.source_id.clone());
    }
    Arc::new(index)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

/// Outcome of `cmd_generate`.
#[derive(Debug)]
pub struct GenerateOutcome {
    pub new_variants: usize,
    pub total_variants: usize,
    pub stats: RejectionStats,
    pub store_path: std::path::PathBuf,
}

/// Generate counterfactual variants for every (transcript, dimension,
/// condition) triple not already accepted in the variant store. Idempotent:
/// a rerun with a complete store performs no provider calls.
pub fn cmd_generate(config: &AuditConfig) -> Result<GenerateOutcome, AuditError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| AuditError::Input(format!("cannot create out dir: {e}")))?;
    let corpus = corpus::load_corpus(&config.corpus)?;
    let pools = load_pools(config)?;
    let registry = selected_registry(config)?;
    let providers = ProvidersConfig::load(&config.providers)?;

    let store_path = config.variant_store_path();
    let existing = if store_path.exists() {
        load_variant_store(&store_path).map_err(AuditError::from)?
    } else {
        Vec::new()
    };
    let existing_keys: HashSet<_> = existing.iter().map(|v| v.key()).collect();

    let index = corpus_index(&corpus, &existing);
    let generation_model_ids: Vec<String> = vec![
        config.identifier_model.clone(),
        config.generator_model_id().to_string(),
        config.validator_model.clone(),
    ];
    let gateway = build_gateway(config, &providers, &generation_model_ids, Some(&index), true)?;
    let models = GenerationModels {
        identifier: providers.model(&config.identifier_model)?,
        generator: providers.model(config.generator_model_id())?,
        validator: providers.model(&config.validator_model)?,
    };
    let generation_config = GenerationConfig {
        seed: config.seed,
        max_attempts: 3,
        validation_scope: config.validation_scope,
    };

    // One work item per transcript; per-transcript generation is sequential
    // (annotation precedes transformation).
    let items: Vec<&Transcript> = corpus.iter().collect();
    let results = parallel_map(items, config.max_concurrency, |transcript| {
        let mut variants = Vec::new();
        let mut stats = RejectionStats::default();
        for dimension in &registry {
            let mut subset = dimension.clone();
            subset.conditions.retain(|c| {
                !existing_keys.contains(&(
                    transcript.id.clone(),
                    dimension.name.as_str().to_string(),
                    c.label.clone(),
                ))
            });
            if subset.conditions.is_empty() {
                continue;
            }
            match generate_dimension_variants(
                transcript,
                &subset,
                &gateway,
                &models,
                &pools,
                &generation_config,
            ) {
                Ok(outcome) => {
                    variants.extend(outcome.variants);
                    stats.merge(&outcome.stats);
                }
                Err(GenerationError::Annotation { message, .. }) => {
                    log::warn!(
                        "annotation failed for {}; skipping {} there: {message}",
                        transcript.id,
                        dimension.name
                    );
                    stats
                        .per_dimension
                        .entry(dimension.name.as_str().to_string())
                        .or_default()
                        .skipped += subset.conditions.len() as u64;
                }
                Err(other) => return Err(AuditError::from(other)),
            }
        }
        Ok((variants, stats))
    });

    let mut all_variants = existing;
    let mut run_stats = RejectionStats::default();
    let mut new_count = 0usize;
    for result in results {
        let (variants, stats) = result?;
        new_count += variants.len();
        all_variants.extend(variants);
        run_stats.merge(&stats);
    }
    all_variants.sort_by_key(|v| v.key());
    save_variant_store(&all_variants, &store_path).map_err(AuditError::from)?;

    // Cumulative stats across reruns.
    let mut stats = if config.stats_path().exists() {
        let raw = std::fs::read_to_string(config.stats_path())
            .map_err(|e| AuditError::Internal(e.to_string()))?;
        serde_json::from_str::<RejectionStats>(&raw)
            .map_err(|e| AuditError::Internal(e.to_string()))?
    } else {
        RejectionStats::default()
    };
    stats.merge(&run_stats);
    std::fs::write(
        config.stats_path(),
        serde_json::to_string_pretty(&stats).expect("stats serialize"),
    )
    .map_err(|e| AuditError::Internal(e.to_string()))?;

    // Review export: a human-readable diff per accepted variant.
    let review_dir = config.review_dir();
    std::fs::create_dir_all(&review_dir)
        .map_err(|e| AuditError::Input(format!("cannot create review dir: {e}")))?;
    for variant in all_variants.iter().filter(|v| v.is_usable()) {
        let name = format!(
            "{}__{}__{}.diff",
            sanitize(&variant.source_id),
            variant.dimension.as_str(),
            sanitize(&variant.condition)
        );
        std::fs::write(review_dir.join(name), render_review_diff(variant))
            .map_err(|e| AuditError::Input(format!("review export: {e}")))?;
    }

    Ok(GenerateOutcome {
        new_variants: new_count,
        total_variants: all_variants.len(),
        stats,
        store_path,
    })
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct EvaluateMeta {
    parse_failures: u64,
}

/// Outcome of `cmd_evaluate`.
#[derive(Debug)]
pub struct EvaluateOutcome {
    pub new_records: usize,
    pub total_records: usize,
    pub parse_failures: u64,
    pub store_path: std::path::PathBuf,
}

fn record_key(
    variant: &CounterfactualVariant,
    question: &QaQuestion,
    model_id: &str,
    mode: PromptMode,
) -> (String, DimensionName, String, String, String, PromptMode) {
    (
        variant.source_id.clone(),
        variant.dimension,
        variant.condition.clone(),
        question.question_id.clone(),
        model_id.to_string(),
        mode,
    )
}

/// Evaluate every accepted variant against every selected question and
/// model: one Auto-QA judgment plus positives and improvements coaching per
/// record. Parse failures are counted and excluded, never fabricated.
pub fn cmd_evaluate(config: &AuditConfig) -> Result<EvaluateOutcome, AuditError> {
    config.validate()?;
    let store_path = config.variant_store_path();
    if !store_path.exists() {
        return Err(AuditError::Input(format!(
            "variant store {} does not exist; run generate first",
            store_path.display()
        )));
    }
    let variants = load_variant_store(&store_path).map_err(AuditError::from)?;
    let corpus = corpus::load_corpus(&config.corpus)?;
    let questions = corpus::load_question_bank(&config.questions)?;
    let providers = ProvidersConfig::load(&config.providers)?;
    let selected_dims = config.selected_dimensions()?;
    let mode = config.prompt_mode;

    let record_path = config.record_store_path();
    let existing = if record_path.exists() {
        load_record_store(&record_path).map_err(AuditError::from)?
    } else {
        Vec::new()
    };
    let existing_keys: HashSet<_> = existing.iter().map(|r| r.key()).collect();

    let index = corpus_index(&corpus, &variants);
    let gateway = build_gateway(config, &providers, &config.models, Some(&index), true)?;
    let model_specs: Vec<ModelSpec> = config
        .models
        .iter()
        .map(|m| providers.model(m))
        .collect::<Result<_, _>>()?;

    struct WorkItem<'a> {
        variant: &'a CounterfactualVariant,
        question: &'a QaQuestion,
        model: &'a ModelSpec,
    }
    let mut items = Vec::new();
    for variant in variants.iter().filter(|v| v.is_usable()) {
        if !selected_dims.contains(&variant.dimension) {
            continue;
        }
        for question in &questions {
            for model in &model_specs {
                if existing_keys.contains(&record_key(variant, question, &model.model_id, mode)) {
                    continue;
                }
                items.push(WorkItem {
                    variant,
                    question,
                    model,
                });
            }
        }
    }

    let parse_failures = AtomicUsize::new(0);
    let results = parallel_map(items, config.max_concurrency, |item| {
        let qa = match gateway.evaluate_qa(&item.variant.transcript, item.question, item.model, mode)
        {
            Ok(result) => result,
            Err(GatewayError::Parse(failure)) => {
                log::warn!(
                    "unparseable QA reply for {:?}: {failure}",
                    record_key(item.variant, item.question, &item.model.model_id, mode)
                );
                parse_failures.fetch_add(1, Ordering::SeqCst);
                return Ok(None);
            }
            Err(other) => return Err(AuditError::from(other)),
        };
        let coach = |kind: CoachingKind| -> Result<Option<u8>, AuditError> {
            match gateway.coach(&item.variant.transcript, item.model, kind, mode) {
                Ok(result) => Ok(Some(result.score)),
                Err(GatewayError::Parse(failure)) => {
                    log::warn!("unparseable {} reply: {failure}", kind.as_str());
                    parse_failures.fetch_add(1, Ordering::SeqCst);
                    Ok(None)
                }
                Err(other) => Err(AuditError::from(other)),
            }
        };
        let positive_score = coach(CoachingKind::Positives)?;
        let improvement_score = coach(CoachingKind::Improvements)?;
        Ok(Some(EvaluationRecord {
            source_id: item.variant.source_id.clone(),
            dimension: item.variant.dimension,
            condition: item.variant.condition.clone(),
            question_id: item.question.question_id.clone(),
            model_id: item.model.model_id.clone(),
            prompt_mode: mode,
            judgment: qa.judgment,
            confidence: qa.confidence,
            positive_score,
            improvement_score,
        }))
    });

    let mut all_records = existing;
    let mut new_records = 0usize;
    for result in results {
        if let Some(record) = result? {
            new_records += 1;
            all_records.push(record);
        }
    }
    all_records.sort_by_key(|r| r.key());
    save_record_store(&all_records, &record_path).map_err(AuditError::from)?;

    let mut meta = if config.evaluate_meta_path().exists() {
        let raw = std::fs::read_to_string(config.evaluate_meta_path())
            .map_err(|e| AuditError::Internal(e.to_string()))?;
        serde_json::from_str::<EvaluateMeta>(&raw)
            .map_err(|e| AuditError::Internal(e.to_string()))?
    } else {
        EvaluateMeta::default()
    };
    meta.parse_failures += parse_failures.load(Ordering::SeqCst) as u64;
    std::fs::write(
        config.evaluate_meta_path(),
        serde_json::to_string_pretty(&meta).expect("meta serializes"),
    )
    .map_err(|e| AuditError::Internal(e.to_string()))?;

    Ok(EvaluateOutcome {
        new_records,
        total_records: all_records.len(),
        parse_failures: meta.parse_failures,
        store_path: record_path,
    })
}

/// Outcome of `cmd_baseline`.
#[derive(Debug)]
pub struct BaselineOutcome {
    pub new_records: usize,
    pub total_records: usize,
    pub store_path: std::path::PathBuf,
}

/// Repeat-evaluate every original transcript `k` times per question and
/// model to measure the intrinsic noise floor. Responses are independent
/// samples: the cache is never consulted for repeats.
pub fn cmd_baseline(config: &AuditConfig) -> Result<BaselineOutcome, AuditError> {
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| AuditError::Input(format!("cannot create out dir: {e}")))?;
    let corpus = corpus::load_corpus(&config.corpus)?;
    let questions = corpus::load_question_bank(&config.questions)?;
    let providers = ProvidersConfig::load(&config.providers)?;
    let mode = config.prompt_mode;
    let k = config.robustness_k;

    let store_path = config.baseline_store_path();
    let existing = if store_path.exists() {
        load_repeat_store(&store_path).map_err(AuditError::from)?
    } else {
        Vec::new()
    };
    let mut repeat_counts: BTreeMap<(String, String, String), u32> = BTreeMap::new();
    for record in &existing {
        *repeat_counts
            .entry((
                record.source_id.clone(),
                record.question_id.clone(),
                record.model_id.clone(),
            ))
            .or_default() += 1;
    }

    let index = corpus_index(&corpus, &[]);
    let gateway = build_gateway(config, &providers, &config.models, Some(&index), true)?;
    let model_specs: Vec<ModelSpec> = config
        .models
        .iter()
        .map(|m| providers.model(m))
        .collect::<Result<_, _>>()?;

    // One work item per (transcript, model): coaching repeats are generated
    // once per item and shared across that item's questions.
    struct WorkItem<'a> {
        transcript: &'a Transcript,
        model: &'a ModelSpec,
    }
    let mut items = Vec::new();
    for transcript in &corpus {
        for model in &model_specs {
            let all_done = questions.iter().all(|q| {
                repeat_counts
                    .get(&(
                        transcript.id.clone(),
                        q.question_id.clone(),
                        model.model_id.clone(),
                    ))
                    .is_some_and(|count| *count >= k)
            });
            if !all_done {
                items.push(WorkItem { transcript, model });
            }
        }
    }

    let results = parallel_map(items, config.max_concurrency, |item| {
        let positives =
            gateway.repeat_coach(item.transcript, item.model, CoachingKind::Positives, mode, k)?;
        let improvements = gateway.repeat_coach(
            item.transcript,
            item.model,
            CoachingKind::Improvements,
            mode,
            k,
        )?;
        let mut records = Vec::new();
        for question in &questions {
            let qa_results = gateway.repeat_evaluate(item.transcript, question, item.model, mode, k)?;
            for (idx, qa) in qa_results.iter().enumerate() {
                records.push(RepeatRecord {
                    source_id: item.transcript.id.clone(),
                    question_id: question.question_id.clone(),
                    model_id: item.model.model_id.clone(),
                    prompt_mode: mode,
                    repeat_index: idx as u32,
                    judgment: qa.judgment,
                    confidence: qa.confidence,
                    positive_score: Some(positives[idx].score),
                    improvement_score: Some(improvements[idx].score),
                });
            }
        }
        Ok::<_, AuditError>(records)
    });

    // Regenerated (transcript, model) pairs replace any partial repeats.
    let mut new_records = Vec::new();
    for result in results {
        new_records.extend(result?);
    }
    let replaced: HashSet<(String, String)> = new_records
        .iter()
        .map(|r| (r.source_id.clone(), r.model_id.clone()))
        .collect();
    let mut all_records: Vec<RepeatRecord> = existing
        .into_iter()
        .filter(|r| !replaced.contains(&(r.source_id.clone(), r.model_id.clone())))
        .collect();
    let new_count = new_records.len();
    all_records.extend(new_records);
    all_records.sort_by_key(|r| {
        (
            r.source_id.clone(),
            r.question_id.clone(),
            r.model_id.clone(),
            r.repeat_index,
        )
    });
    save_repeat_store(&all_records, &store_path).map_err(AuditError::from)?;

    Ok(BaselineOutcome {
        new_records: new_count,
        total_records: all_records.len(),
        store_path,
    })
}

/// Outcome of `cmd_score`.
#[derive(Debug)]
pub struct ScoreOutcome {
    pub document: ScoreDocument,
    pub report_dir: std::path::PathBuf,
    pub has_undefined: bool,
}

fn file_digest(path: &Path) -> Result<String, AuditError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AuditError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex::encode(hasher.finalize()))
}

/// Compute every metric family from the persisted stores and export the
/// report directory. Undefined scores are a warning, not an error.
pub fn cmd_score(config: &AuditConfig) -> Result<ScoreOutcome, AuditError> {
    config.validate()?;
    let record_path = config.record_store_path();
    if !record_path.exists() {
        return Err(AuditError::Input(format!(
            "record store {} does not exist; run evaluate first",
            record_path.display()
        )));
    }
    let records = load_record_store(&record_path).map_err(AuditError::from)?;
    let selected = config.selected_dimensions()?;
    let registry = selected_registry(config)?;

    // Per (model, dimension, mode) scores.
    let mut modes: Vec<PromptMode> = Vec::new();
    for record in &records {
        if !modes.contains(&record.prompt_mode) {
            modes.push(record.prompt_mode);
        }
    }
    modes.sort();
    let mut dimension_scores = Vec::new();
    for mode in &modes {
        for model_id in &config.models {
            for dimension in &registry {
                let slice: Vec<&EvaluationRecord> = records
                    .iter()
                    .filter(|r| {
                        r.prompt_mode == *mode
                            && r.model_id == *model_id
                            && r.dimension == dimension.name
                    })
                    .collect();
                let pairs = taxonomy::pairs(dimension);
                dimension_scores.push(dimension_score(
                    &slice,
                    dimension.name,
                    model_id,
                    *mode,
                    &pairs,
                ));
            }
        }
    }

    // Robustness + accuracy from the baseline store, when present.
    let baseline_path = config.baseline_store_path();
    let mut baselines = Vec::new();
    let mut accuracy_scores = Vec::new();
    if baseline_path.exists() {
        let repeats = load_repeat_store(&baseline_path).map_err(AuditError::from)?;
        for model_id in &config.models {
            let slice: Vec<&RepeatRecord> = repeats
                .iter()
                .filter(|r| r.model_id == *model_id)
                .collect();
            if !slice.is_empty() {
                baselines.push(robustness(&slice, model_id));
            }
        }
        if let Some(gold_path) = &config.gold_labels {
            let gold = corpus::load_gold_labels(gold_path)?;
            for model_id in &config.models {
                let firsts: Vec<(&str, &str, crate::corpus::Answer)> = repeats
                    .iter()
                    .filter(|r| r.model_id == *model_id && r.repeat_index == 0)
                    .map(|r| (r.source_id.as_str(), r.question_id.as_str(), r.judgment))
                    .collect();
                if !firsts.is_empty() {
                    accuracy_scores.push(accuracy(firsts, &gold, model_id)?);
                }
            }
        }
    } else {
        log::warn!(
            "baseline store {} missing; robustness and accuracy are empty",
            baseline_path.display()
        );
    }

    // Fairness-prompting deltas when both modes were evaluated.
    let deltas = if modes.contains(&PromptMode::Standard) && modes.contains(&PromptMode::Fairness) {
        let standard: Vec<metrics::DimensionScore> = dimension_scores
            .iter()
            .filter(|s| s.prompt_mode == PromptMode::Standard)
            .cloned()
            .collect();
        let fairness: Vec<metrics::DimensionScore> = dimension_scores
            .iter()
            .filter(|s| s.prompt_mode == PromptMode::Fairness)
            .cloned()
            .collect();
        Some(prompting_delta(&standard, &fairness)?)
    } else {
        None
    };

    let rejection_stats = if config.stats_path().exists() {
        let raw = std::fs::read_to_string(config.stats_path())
            .map_err(|e| AuditError::Internal(e.to_string()))?;
        serde_json::from_str(&raw).map_err(|e| AuditError::Internal(e.to_string()))?
    } else {
        RejectionStats::default()
    };
    let parse_failures = if config.evaluate_meta_path().exists() {
        let raw = std::fs::read_to_string(config.evaluate_meta_path())
            .map_err(|e| AuditError::Internal(e.to_string()))?;
        serde_json::from_str::<EvaluateMeta>(&raw)
            .map_err(|e| AuditError::Internal(e.to_string()))?
            .parse_failures
    } else {
        0
    };

    let corpus_digest = file_digest(&config.corpus)?;
    let created_at = config.timestamp.clone().unwrap_or_else(|| {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    });
    let manifest = RunManifest {
        run_id: config
            .run_id
            .clone()
            .unwrap_or_else(|| format!("audit-{}-s{}", &corpus_digest[..8], config.seed)),
        corpus_digest,
        dimensions: selected.iter().map(|d| d.as_str().to_string()).collect(),
        models: config.models.clone(),
        prompt_modes: modes.iter().map(|m| m.as_str().to_string()).collect(),
        seed: config.seed,
        robustness_k: config.robustness_k,
        created_at,
        parse_failures,
        skipped_conditions: rejection_stats.total_skipped(),
        // File names relative to the out dir, keeping manifests portable.
        record_store: Some("records.jsonl".to_string()),
        baseline_store: baseline_path.exists().then(|| "baseline.jsonl".to_string()),
    };

    let document = ScoreDocument {
        manifest,
        dimension_scores,
        robustness: baselines,
        accuracy: accuracy_scores,
        deltas,
        rejection_stats,
    };

    let has_undefined = document.dimension_scores.iter().any(|s| {
        s.cfr_percent.is_none()
            || s.masd_confidence.is_none()
            || s.masd_positive.is_none()
            || s.masd_improvement.is_none()
    });
    if has_undefined {
        log::warn!("some scores are undefined (no available instances); rendered as em dashes");
    }

    let report_dir = config.report_dir();
    export_run(&document, &selected, &report_dir)?;

    Ok(ScoreOutcome {
        document,
        report_dir,
        has_undefined,
    })
}

/// Convenience wrapper tying counterfactual generation idempotency checks
/// to the variant store semantics in tests and examples.
pub fn usable_variants(path: &Path) -> Result<Vec<CounterfactualVariant>, AuditError> {
    Ok(counterfactual::load_variant_store(path)
        .map_err(AuditError::from)?
        .into_iter()
        .filter(|v| v.is_usable())
        .collect())
}
