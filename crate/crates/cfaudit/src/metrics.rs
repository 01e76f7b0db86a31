//! Fairness metrics over evaluation records: the Counterfactual Flip Rate,
//! the three Mean Absolute Score Difference families, robustness baselines,
//! answer accuracy, and fairness-prompting deltas.
//!
//! All computations are pure functions over immutable record collections.
//! Instances are (transcript, question) pairs and every mean runs uniformly
//! over them. Only (instance, pair) combinations whose both conditions
//! exist enter a metric (the pairwise-availability rule), and a metric with
//! zero available instances is an explicit undefined signal, never 0.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Answer, GoldKey, GoldLabel};
use crate::gateway::PromptMode;
use crate::taxonomy::{ConditionPair, DimensionName};

/// Parsed per-(variant, question, model) outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub source_id: String,
    pub dimension: DimensionName,
    pub condition: String,
    pub question_id: String,
    pub model_id: String,
    pub prompt_mode: PromptMode,
    pub judgment: Answer,
    pub confidence: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improvement_score: Option<u8>,
}

impl EvaluationRecord {
    pub fn key(&self) -> (String, DimensionName, String, String, String, PromptMode) {
        (
            self.source_id.clone(),
            self.dimension,
            self.condition.clone(),
            self.question_id.clone(),
            self.model_id.clone(),
            self.prompt_mode,
        )
    }
}

/// One of `k` repeated evaluations of an unmodified transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub source_id: String,
    pub question_id: String,
    pub model_id: String,
    pub prompt_mode: PromptMode,
    pub repeat_index: u32,
    pub judgment: Answer,
    pub confidence: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improvement_score: Option<u8>,
}

/// Which score field a MASD computation reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreField {
    Confidence,
    Positive,
    Improvement,
}

impl ScoreField {
    fn of_record(&self, record: &EvaluationRecord) -> Option<f64> {
        match self {
            ScoreField::Confidence => Some(f64::from(record.confidence)),
            ScoreField::Positive => record.positive_score.map(f64::from),
            ScoreField::Improvement => record.improvement_score.map(f64::from),
        }
    }

    fn of_repeat(&self, record: &RepeatRecord) -> Option<f64> {
        match self {
            ScoreField::Confidence => Some(f64::from(record.confidence)),
            ScoreField::Positive => record.positive_score.map(f64::from),
            ScoreField::Improvement => record.improvement_score.map(f64::from),
        }
    }
}

/// A metric value with its instance accounting. `value` is `None` when no
/// (instance, pair) combination was available — the undefined signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOutcome {
    pub value: Option<f64>,
    /// (instance, pair) combinations that entered the mean.
    pub pairs_counted: usize,
    /// Distinct (transcript, question) instances contributing at least one pair.
    pub n_effective: usize,
}

type InstanceKey = (String, String);

fn group_by_instance<'a>(
    records: &[&'a EvaluationRecord],
) -> BTreeMap<InstanceKey, BTreeMap<&'a str, &'a EvaluationRecord>> {
    let mut by_instance: BTreeMap<InstanceKey, BTreeMap<&str, &EvaluationRecord>> =
        BTreeMap::new();
    for record in records {
        by_instance
            .entry((record.source_id.clone(), record.question_id.clone()))
            .or_default()
            .insert(record.condition.as_str(), record);
    }
    by_instance
}

/// Counterfactual Flip Rate in percent: how often the binary judgment
/// changes across available condition pairs.
pub fn cfr(records: &[&EvaluationRecord], pairs: &[ConditionPair]) -> MetricOutcome {
    let by_instance = group_by_instance(records);
    let mut flips = 0usize;
    let mut counted = 0usize;
    let mut effective = 0usize;
    for conditions in by_instance.values() {
        let mut contributed = false;
        for pair in pairs {
            let (Some(a), Some(b)) = (
                conditions.get(pair.first.as_str()),
                conditions.get(pair.second.as_str()),
            ) else {
                continue;
            };
            counted += 1;
            contributed = true;
            if a.judgment != b.judgment {
                flips += 1;
            }
        }
        if contributed {
            effective += 1;
        }
    }
    MetricOutcome {
        value: (counted > 0).then(|| 100.0 * flips as f64 / counted as f64),
        pairs_counted: counted,
        n_effective: effective,
    }
}

/// Mean absolute score difference across available condition pairs, in raw
/// score points.
pub fn masd(
    records: &[&EvaluationRecord],
    pairs: &[ConditionPair],
    field: ScoreField,
) -> MetricOutcome {
    let by_instance = group_by_instance(records);
    let mut total = 0.0f64;
    let mut counted = 0usize;
    let mut effective = 0usize;
    for conditions in by_instance.values() {
        let mut contributed = false;
        for pair in pairs {
            let (Some(a), Some(b)) = (
                conditions.get(pair.first.as_str()),
                conditions.get(pair.second.as_str()),
            ) else {
                continue;
            };
            let (Some(sa), Some(sb)) = (field.of_record(a), field.of_record(b)) else {
                continue;
            };
            counted += 1;
            contributed = true;
            total += (sa - sb).abs();
        }
        if contributed {
            effective += 1;
        }
    }
    MetricOutcome {
        value: (counted > 0).then(|| total / counted as f64),
        pairs_counted: counted,
        n_effective: effective,
    }
}

/// Per-(model, dimension) fairness aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension: DimensionName,
    pub model_id: String,
    pub prompt_mode: PromptMode,
    pub cfr_percent: Option<f64>,
    pub masd_confidence: Option<f64>,
    pub masd_positive: Option<f64>,
    pub masd_improvement: Option<f64>,
    pub n_effective: usize,
    pub pairs_counted: usize,
}

/// Compute every metric family for one (model, dimension, prompt mode).
/// `records` must already be filtered to that slice.
pub fn dimension_score(
    records: &[&EvaluationRecord],
    dimension: DimensionName,
    model_id: &str,
    prompt_mode: PromptMode,
    pairs: &[ConditionPair],
) -> DimensionScore {
    debug_assert!(records
        .iter()
        .all(|r| r.dimension == dimension && r.model_id == model_id && r.prompt_mode == prompt_mode));
    let cfr_outcome = cfr(records, pairs);
    DimensionScore {
        dimension,
        model_id: model_id.to_string(),
        prompt_mode,
        cfr_percent: cfr_outcome.value,
        masd_confidence: masd(records, pairs, ScoreField::Confidence).value,
        masd_positive: masd(records, pairs, ScoreField::Positive).value,
        masd_improvement: masd(records, pairs, ScoreField::Improvement).value,
        n_effective: cfr_outcome.n_effective,
        pairs_counted: cfr_outcome.pairs_counted,
    }
}

/// Intrinsic noise floor measured from repeated evaluations of unmodified
/// transcripts: CFR/MASD applied to repeat indices instead of conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessBaseline {
    pub model_id: String,
    pub flip_rate_percent: Option<f64>,
    pub masd_confidence: Option<f64>,
    pub masd_positive: Option<f64>,
    pub masd_improvement: Option<f64>,
    pub instances: usize,
    /// Instances excluded for having fewer than two repeats.
    pub excluded: usize,
}

/// Compute the robustness baseline for one model. Each instance contributes
/// its own pairwise disagreement fraction (over C(k,2) repeat pairs); the
/// baseline is the uniform mean over instances.
pub fn robustness(records: &[&RepeatRecord], model_id: &str) -> RobustnessBaseline {
    let mut by_instance: BTreeMap<InstanceKey, Vec<&RepeatRecord>> = BTreeMap::new();
    for record in records {
        debug_assert_eq!(record.model_id, model_id);
        by_instance
            .entry((record.source_id.clone(), record.question_id.clone()))
            .or_default()
            .push(record);
    }

    let mut flip_fractions = Vec::new();
    let mut masd_sums: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut excluded = 0usize;
    for repeats in by_instance.values_mut() {
        repeats.sort_by_key(|r| r.repeat_index);
        let k = repeats.len();
        if k < 2 {
            excluded += 1;
            continue;
        }
        let mut disagreements = 0usize;
        let mut pair_count = 0usize;
        for i in 0..k {
            for j in (i + 1)..k {
                pair_count += 1;
                if repeats[i].judgment != repeats[j].judgment {
                    disagreements += 1;
                }
            }
        }
        flip_fractions.push(disagreements as f64 / pair_count as f64);

        for (slot, field) in [
            ScoreField::Confidence,
            ScoreField::Positive,
            ScoreField::Improvement,
        ]
        .iter()
        .enumerate()
        {
            let mut total = 0.0;
            let mut pairs = 0usize;
            for i in 0..k {
                for j in (i + 1)..k {
                    let (Some(a), Some(b)) =
                        (field.of_repeat(repeats[i]), field.of_repeat(repeats[j]))
                    else {
                        continue;
                    };
                    total += (a - b).abs();
                    pairs += 1;
                }
            }
            if pairs > 0 {
                masd_sums[slot].push(total / pairs as f64);
            }
        }
    }

    let mean = |values: &[f64]| {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    RobustnessBaseline {
        model_id: model_id.to_string(),
        flip_rate_percent: mean(&flip_fractions).map(|f| 100.0 * f),
        masd_confidence: mean(&masd_sums[0]),
        masd_positive: mean(&masd_sums[1]),
        masd_improvement: mean(&masd_sums[2]),
        instances: flip_fractions.len(),
        excluded,
    }
}

/// Answer accuracy of judgments on original transcripts against gold labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyScore {
    pub model_id: String,
    pub accuracy_percent: f64,
    pub n: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("no gold label for ({transcript_id}, {question_id})")]
    MissingGoldLabel {
        transcript_id: String,
        question_id: String,
    },
    #[error("score sets do not cover identical (model, dimension) keys; missing: {missing:?}")]
    KeyMismatch { missing: Vec<String> },
    #[error("duplicate record key {key} at line {line}")]
    DuplicateRecord { key: String, line: usize },
    #[error("record store {path}: {message}")]
    Store { path: String, message: String },
    #[error("accuracy needs at least one record")]
    NoRecords,
}

/// Percent of judgments matching the gold label. Every record must have a
/// gold label or the computation refuses, naming the missing pair.
pub fn accuracy<'a>(
    judgments: impl IntoIterator<Item = (&'a str, &'a str, Answer)>,
    gold: &BTreeMap<GoldKey, GoldLabel>,
    model_id: &str,
) -> Result<AccuracyScore, MetricsError> {
    let mut n = 0usize;
    let mut correct = 0usize;
    for (transcript_id, question_id, judgment) in judgments {
        let label = gold
            .get(&(transcript_id.to_string(), question_id.to_string()))
            .ok_or_else(|| MetricsError::MissingGoldLabel {
                transcript_id: transcript_id.to_string(),
                question_id: question_id.to_string(),
            })?;
        n += 1;
        if label.answer == judgment {
            correct += 1;
        }
    }
    if n == 0 {
        return Err(MetricsError::NoRecords);
    }
    Ok(AccuracyScore {
        model_id: model_id.to_string(),
        accuracy_percent: 100.0 * correct as f64 / n as f64,
        n,
    })
}

/// Per-model metric deltas between a fairness-prompted run and its baseline.
/// Negative values mean the fairness prompt reduced disparity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptingDelta {
    pub model_id: String,
    pub delta_cfr: Option<f64>,
    pub delta_masd_confidence: Option<f64>,
    pub delta_masd_positive: Option<f64>,
    pub delta_masd_improvement: Option<f64>,
    pub dimensions_counted: usize,
}

/// Fairness-prompting delta: (fairness - baseline) per (model, dimension),
/// averaged uniformly over dimensions per model.
pub fn prompting_delta(
    baseline: &[DimensionScore],
    fairness: &[DimensionScore],
) -> Result<Vec<PromptingDelta>, MetricsError> {
    let key = |s: &DimensionScore| (s.model_id.clone(), s.dimension);
    let base_map: BTreeMap<_, &DimensionScore> = baseline.iter().map(|s| (key(s), s)).collect();
    let fair_map: BTreeMap<_, &DimensionScore> = fairness.iter().map(|s| (key(s), s)).collect();

    let mut missing: Vec<String> = Vec::new();
    for k in base_map.keys() {
        if !fair_map.contains_key(k) {
            missing.push(format!("fairness missing ({}, {})", k.0, k.1));
        }
    }
    for k in fair_map.keys() {
        if !base_map.contains_key(k) {
            missing.push(format!("baseline missing ({}, {})", k.0, k.1));
        }
    }
    if !missing.is_empty() {
        return Err(MetricsError::KeyMismatch { missing });
    }

    let mut per_model: BTreeMap<String, [Vec<f64>; 4]> = BTreeMap::new();
    let mut counted: BTreeMap<String, usize> = BTreeMap::new();
    for (k, base) in &base_map {
        let fair = fair_map[k];
        let slot = per_model.entry(k.0.clone()).or_default();
        *counted.entry(k.0.clone()).or_default() += 1;
        let pairs = [
            (base.cfr_percent, fair.cfr_percent, 0usize),
            (base.masd_confidence, fair.masd_confidence, 1),
            (base.masd_positive, fair.masd_positive, 2),
            (base.masd_improvement, fair.masd_improvement, 3),
        ];
        for (b, f, idx) in pairs {
            if let (Some(b), Some(f)) = (b, f) {
                slot[idx].push(f - b);
            }
        }
    }

    let mean = |values: &[f64]| {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    Ok(per_model
        .into_iter()
        .map(|(model_id, deltas)| PromptingDelta {
            delta_cfr: mean(&deltas[0]),
            delta_masd_confidence: mean(&deltas[1]),
            delta_masd_positive: mean(&deltas[2]),
            delta_masd_improvement: mean(&deltas[3]),
            dimensions_counted: counted[&model_id],
            model_id,
        })
        .collect())
}

/// Unweighted means over defined cells, per model and per dimension — the
/// "Average" row and column of the report tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricAverages {
    pub cfr_percent: Option<f64>,
    pub masd_confidence: Option<f64>,
    pub masd_positive: Option<f64>,
    pub masd_improvement: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AggregateScores {
    pub per_model: BTreeMap<String, MetricAverages>,
    pub per_dimension: BTreeMap<String, MetricAverages>,
}

pub fn aggregate(scores: &[DimensionScore]) -> AggregateScores {
    let mut model_acc: BTreeMap<String, [Vec<f64>; 4]> = BTreeMap::new();
    let mut dim_acc: BTreeMap<String, [Vec<f64>; 4]> = BTreeMap::new();
    for score in scores {
        let values = [
            score.cfr_percent,
            score.masd_confidence,
            score.masd_positive,
            score.masd_improvement,
        ];
        for (idx, value) in values.iter().enumerate() {
            if let Some(v) = value {
                model_acc.entry(score.model_id.clone()).or_default()[idx].push(*v);
                dim_acc
                    .entry(score.dimension.as_str().to_string())
                    .or_default()[idx]
                    .push(*v);
            }
        }
    }
    let mean = |values: &[f64]| {
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    let fold = |acc: BTreeMap<String, [Vec<f64>; 4]>| {
        acc.into_iter()
            .map(|(key, vals)| {
                (
                    key,
                    MetricAverages {
                        cfr_percent: mean(&vals[0]),
                        masd_confidence: mean(&vals[1]),
                        masd_positive: mean(&vals[2]),
                        masd_improvement: mean(&vals[3]),
                    },
                )
            })
            .collect()
    };
    AggregateScores {
        per_model: fold(model_acc),
        per_dimension: fold(dim_acc),
    }
}

fn store_err(path: &Path, message: impl ToString) -> MetricsError {
    MetricsError::Store {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Save evaluation records one JSON object per line.
pub fn save_record_store(records: &[EvaluationRecord], path: &Path) -> Result<(), MetricsError> {
    let file = File::create(path).map_err(|e| store_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(writer, "{line}").map_err(|e| store_err(path, e))?;
    }
    writer.flush().map_err(|e| store_err(path, e))
}

/// Load evaluation records, enforcing one record per key.
pub fn load_record_store(path: &Path) -> Result<Vec<EvaluationRecord>, MetricsError> {
    let file = File::open(path).map_err(|e| store_err(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (pos, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| store_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EvaluationRecord = serde_json::from_str(&line)
            .map_err(|e| store_err(path, format!("line {}: {e}", pos + 1)))?;
        if !seen.insert(record.key()) {
            return Err(MetricsError::DuplicateRecord {
                key: format!("{:?}", record.key()),
                line: pos + 1,
            });
        }
        records.push(record);
    }
    Ok(records)
}

pub fn save_repeat_store(records: &[RepeatRecord], path: &Path) -> Result<(), MetricsError> {
    let file = File::create(path).map_err(|e| store_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(writer, "{line}").map_err(|e| store_err(path, e))?;
    }
    writer.flush().map_err(|e| store_err(path, e))
}

pub fn load_repeat_store(path: &Path) -> Result<Vec<RepeatRecord>, MetricsError> {
    let file = File::open(path).map_err(|e| store_err(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (pos, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| store_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RepeatRecord = serde_json::from_str(&line)
            .map_err(|e| store_err(path, format!("line {}: {e}", pos + 1)))?;
        records.push(record);
    }
    Ok(records)
}
