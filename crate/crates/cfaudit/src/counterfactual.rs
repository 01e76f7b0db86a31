//! Counterfactual variant generation: turn transformation, context
//! injection, and metadata appending, guarded by the semantic-equivalence
//! gate with up to three attempts per condition. Every variant carries full
//! provenance and the per-dimension rejection accounting needed for the
//! audit report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{MetadataHeader, Speaker, Transcript, Turn};
use crate::gateway::parse::{extract_json_block, parse_verdict, Verdict};
use crate::gateway::prompts::{render_transcript, TemplateId};
use crate::gateway::{Gateway, GatewayError, ModelSpec};
use crate::taxonomy::{
    resolve_payload, AttributePools, Condition, ConditionPayload, DimensionName,
    FairnessDimension, GenerationOperation, ResolvedPayload, TaxonomyError,
};

/// Turn-level cues identified on a source transcript before transformation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnAnnotation {
    #[serde(default)]
    pub agent_name: String,
    #[serde(default)]
    pub agent_gender: String,
    #[serde(default)]
    pub agent_race: String,
    #[serde(default)]
    pub agent_religion: String,
    #[serde(default)]
    pub name_turns: Vec<u32>,
    #[serde(default)]
    pub agent_pronouns: Vec<String>,
    #[serde(default)]
    pub gender_turns: Vec<u32>,
    #[serde(default)]
    pub race_turns: Vec<u32>,
    #[serde(default)]
    pub religion_turns: Vec<u32>,
    #[serde(default)]
    pub politeness_turns: Vec<u32>,
    #[serde(default)]
    pub formality_turns: Vec<u32>,
    #[serde(default)]
    pub directness_turns: Vec<u32>,
    #[serde(default)]
    pub emotional_labor_turns: Vec<u32>,
    #[serde(default)]
    pub disfluency_turns: Vec<u32>,
    #[serde(default)]
    pub disability_turns: Vec<u32>,
}

impl TurnAnnotation {
    /// Drop indices the transcript does not contain. Pronouns stay aligned
    /// with `gender_turns`; a length mismatch truncates both to the shorter.
    fn enforce_ranges(&mut self, transcript: &Transcript) {
        let max = transcript.turns.len() as u32;
        let in_range = |idx: &u32| {
            let ok = *idx >= 1 && *idx <= max;
            if !ok {
                log::warn!(
                    "annotation for {} listed out-of-range turn {idx}; dropped",
                    transcript.id
                );
            }
            ok
        };
        let mut gender = Vec::new();
        let mut pronouns = Vec::new();
        for (pos, idx) in self.gender_turns.iter().enumerate() {
            if in_range(idx) {
                gender.push(*idx);
                if let Some(p) = self.agent_pronouns.get(pos) {
                    pronouns.push(p.clone());
                }
            }
        }
        let aligned = gender.len().min(pronouns.len());
        if gender.len() != pronouns.len() {
            log::warn!(
                "annotation for {} has {} gender turns but {} pronouns; truncating to {aligned}",
                transcript.id,
                gender.len(),
                pronouns.len()
            );
        }
        gender.truncate(aligned);
        pronouns.truncate(aligned);
        self.gender_turns = gender;
        self.agent_pronouns = pronouns;

        for list in [
            &mut self.name_turns,
            &mut self.race_turns,
            &mut self.religion_turns,
            &mut self.politeness_turns,
            &mut self.formality_turns,
            &mut self.directness_turns,
            &mut self.emotional_labor_turns,
            &mut self.disfluency_turns,
            &mut self.disability_turns,
        ] {
            list.retain(|idx| in_range(idx));
        }
    }
}

/// One edited or inserted turn. Insertions carry an empty `original`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnEdit {
    pub index: u32,
    pub original: String,
    pub new: String,
}

/// What was changed to produce a variant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(default)]
    pub edits: Vec<TurnEdit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<MetadataHeader>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Accepted,
    Rejected,
    NotRequired,
}

/// A transcript bound to its generation provenance and validation outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualVariant {
    pub source_id: String,
    pub dimension: DimensionName,
    pub condition: String,
    pub transcript: Transcript,
    pub provenance: Provenance,
    pub validation: ValidationStatus,
    pub attempts: u32,
}

impl CounterfactualVariant {
    pub fn is_usable(&self) -> bool {
        matches!(
            self.validation,
            ValidationStatus::Accepted | ValidationStatus::NotRequired
        )
    }

    pub fn key(&self) -> (String, String, String) {
        (
            self.source_id.clone(),
            self.dimension.as_str().to_string(),
            self.condition.clone(),
        )
    }
}

/// Per-dimension attempt accounting. `generated = llm_rejected + accepted`
/// always holds; `skipped` counts conditions that had no target cues and
/// never produced an attempt.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCounts {
    pub generated: u64,
    pub llm_rejected: u64,
    pub accepted: u64,
    pub skipped: u64,
}

impl DimensionCounts {
    pub fn rejection_rate_percent(&self) -> Option<f64> {
        if self.generated == 0 {
            None
        } else {
            Some(100.0 * self.llm_rejected as f64 / self.generated as f64)
        }
    }
}

/// Accumulator merged associatively from per-worker partials.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectionStats {
    pub per_dimension: BTreeMap<String, DimensionCounts>,
}

impl RejectionStats {
    fn counts(&mut self, dimension: DimensionName) -> &mut DimensionCounts {
        self.per_dimension
            .entry(dimension.as_str().to_string())
            .or_default()
    }

    pub fn merge(&mut self, other: &RejectionStats) {
        for (dim, counts) in &other.per_dimension {
            let slot = self.per_dimension.entry(dim.clone()).or_default();
            slot.generated += counts.generated;
            slot.llm_rejected += counts.llm_rejected;
            slot.accepted += counts.accepted;
            slot.skipped += counts.skipped;
        }
    }

    pub fn total_skipped(&self) -> u64 {
        self.per_dimension.values().map(|c| c.skipped).sum()
    }
}

/// How much of the transcript the semantic gate sees.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationScope {
    /// Edited turns with one turn of context on each side (default).
    #[default]
    EditedWithContext,
    /// Both complete transcripts.
    FullTranscript,
}

/// Models used by the generation pipeline.
#[derive(Debug, Clone)]
pub struct GenerationModels {
    pub identifier: ModelSpec,
    pub generator: ModelSpec,
    pub validator: ModelSpec,
}

#[derive(Debug, Clone)]
pub struct GenerationConfig {
    pub seed: u64,
    /// Attempt bound for the semantic gate; a rejected variant is discarded
    /// and regenerated up to this many times.
    pub max_attempts: u32,
    pub validation_scope: ValidationScope,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_attempts: 3,
            validation_scope: ValidationScope::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("annotation reply unparseable: {message}; raw: {raw:?}")]
    Annotation { message: String, raw: String },
    #[error("{dimension}/{condition} ungeneratable for {source_id}: {reason}")]
    Ungeneratable {
        source_id: String,
        dimension: DimensionName,
        condition: String,
        reason: String,
    },
    #[error("transformation reply unparseable: {message}; raw: {raw:?}")]
    BadReply { message: String, raw: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error("variant store: {0}")]
    Store(String),
}

fn mix_seed(base: u64, parts: &[&str], attempt: u32) -> u64 {
    let mut hash = base ^ 0x9e3779b97f4a7c15;
    for part in parts {
        hash ^= crate::gateway::mock::fnv1a(part);
        hash = hash.rotate_left(13).wrapping_mul(0x100000001b3);
    }
    hash ^ u64::from(attempt).wrapping_mul(0xd6e8feb86659fd93)
}

fn context_line(transcript: &Transcript, index: u32) -> String {
    match transcript.turn(index) {
        Some(turn) => format!("{}: {}", turn.speaker, turn.text),
        None if index == 0 => "(start of call)".to_string(),
        None => "(end of call)".to_string(),
    }
}

/// Identify agent attributes and cue turns via the identifier model.
/// Out-of-range indices from the provider are dropped with a warning.
pub fn annotate_turns(
    transcript: &Transcript,
    gateway: &Gateway,
    identifier: &ModelSpec,
) -> Result<TurnAnnotation, GenerationError> {
    let prompt = gateway.prompts().render(
        TemplateId::TurnIdentifier,
        &[("transcript", &render_transcript(transcript))],
    );
    let raw = gateway.complete(&prompt, identifier, "annotate")?;
    let block = extract_json_block(&raw);
    let mut annotation: TurnAnnotation =
        serde_json::from_str(block).map_err(|e| GenerationError::Annotation {
            message: e.to_string(),
            raw: raw.clone(),
        })?;
    annotation.enforce_ranges(transcript);
    Ok(annotation)
}

fn parse_trans_turns(raw: &str) -> Result<Vec<String>, GenerationError> {
    #[derive(Deserialize)]
    struct Reply {
        trans_turn: serde_json::Value,
    }
    let block = extract_json_block(raw);
    let reply: Reply = serde_json::from_str(block).map_err(|e| GenerationError::BadReply {
        message: e.to_string(),
        raw: raw.to_string(),
    })?;
    let turns = match reply.trans_turn {
        serde_json::Value::String(s) => vec![s],
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(|v| match v {
                serde_json::Value::String(s) => Ok(s),
                other => Err(GenerationError::BadReply {
                    message: format!("trans_turn entry is not a string: {other}"),
                    raw: raw.to_string(),
                }),
            })
            .collect::<Result<Vec<_>, _>>()?,
        other => {
            return Err(GenerationError::BadReply {
                message: format!("trans_turn is neither string nor array: {other}"),
                raw: raw.to_string(),
            })
        }
    };
    let cleaned: Vec<String> = turns
        .into_iter()
        .map(|t| t.replace(['\n', '\r'], " ").trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if cleaned.is_empty() {
        return Err(GenerationError::BadReply {
            message: "trans_turn produced no usable text".to_string(),
            raw: raw.to_string(),
        });
    }
    Ok(cleaned)
}

fn rewrite_turn(
    gateway: &Gateway,
    generator: &ModelSpec,
    template: TemplateId,
    fields: &[(&str, &str)],
) -> Result<String, GenerationError> {
    let prompt = gateway.prompts().render(template, fields);
    // Generation calls bypass the response cache: retry attempts must be
    // able to produce fresh output, and idempotent reruns are handled at
    // the variant-store level instead.
    let raw = gateway.complete_uncached(&prompt, generator)?;
    Ok(parse_trans_turns(&raw)?.remove(0))
}

fn ungeneratable(
    transcript: &Transcript,
    dimension: &FairnessDimension,
    condition: &Condition,
    reason: &str,
) -> GenerationError {
    GenerationError::Ungeneratable {
        source_id: transcript.id.clone(),
        dimension: dimension.name,
        condition: condition.label.clone(),
        reason: reason.to_string(),
    }
}

fn untouched_variant(
    transcript: &Transcript,
    dimension: &FairnessDimension,
    condition: &Condition,
) -> CounterfactualVariant {
    CounterfactualVariant {
        source_id: transcript.id.clone(),
        dimension: dimension.name,
        condition: condition.label.clone(),
        transcript: transcript.clone(),
        provenance: Provenance::default(),
        validation: ValidationStatus::NotRequired,
        attempts: 1,
    }
}

fn apply_edits(
    transcript: &Transcript,
    edits: &[(u32, String)],
) -> (Transcript, Vec<TurnEdit>) {
    let mut variant = transcript.clone();
    let mut recorded = Vec::new();
    for (index, new_text) in edits {
        let turn = &mut variant.turns[(*index - 1) as usize];
        if turn.text == *new_text {
            continue; // no-op rewrite: keep the turn byte-identical and unlisted
        }
        recorded.push(TurnEdit {
            index: *index,
            original: turn.text.clone(),
            new: new_text.clone(),
        });
        turn.text = new_text.clone();
    }
    (variant, recorded)
}

/// Operation 1: rewrite existing turns that reveal the targeted attribute.
/// Only annotated target turns may differ from the source.
#[allow(clippy::too_many_arguments)]
pub fn transform_turns(
    transcript: &Transcript,
    annotation: &TurnAnnotation,
    dimension: &FairnessDimension,
    condition: &Condition,
    gateway: &Gateway,
    generator: &ModelSpec,
    pools: &AttributePools,
    seed: u64,
) -> Result<CounterfactualVariant, GenerationError> {
    debug_assert_eq!(dimension.operation, GenerationOperation::TurnTransformation);
    let resolved = resolve_payload(condition, pools, seed)?;

    let mut planned: Vec<(u32, String)> = Vec::new();
    match (&condition.payload, &resolved) {
        (ConditionPayload::Original, _) => {
            return Ok(untouched_variant(transcript, dimension, condition));
        }
        (ConditionPayload::GenderName { gender }, ResolvedPayload::Name(name)) => {
            if annotation.name_turns.is_empty() && annotation.gender_turns.is_empty() {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "no name or gendered-word mentions to transform",
                ));
            }
            for index in &annotation.name_turns {
                let turn = transcript.turn(*index).expect("annotation in range");
                let new_text = rewrite_turn(
                    gateway,
                    generator,
                    TemplateId::TransformName,
                    &[
                        ("target_name", name),
                        ("turn", &turn.text),
                        ("left", &context_line(transcript, index - 1)),
                        ("right", &context_line(transcript, index + 1)),
                    ],
                )?;
                planned.push((*index, new_text));
            }
            let target_gender = gender.to_ascii_lowercase();
            for index in &annotation.gender_turns {
                let turn = transcript.turn(*index).expect("annotation in range");
                let new_text = rewrite_turn(
                    gateway,
                    generator,
                    TemplateId::TransformGender,
                    &[
                        ("target_gender", &target_gender),
                        ("turn", &turn.text),
                        ("left", &context_line(transcript, index - 1)),
                        ("right", &context_line(transcript, index + 1)),
                    ],
                )?;
                planned.push((*index, new_text));
            }
        }
        (ConditionPayload::EthnicName { .. }, ResolvedPayload::Name(name))
        | (ConditionPayload::ReligiousName { .. }, ResolvedPayload::Name(name)) => {
            if annotation.name_turns.is_empty() {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "no agent-name mention to swap",
                ));
            }
            for index in &annotation.name_turns {
                let turn = transcript.turn(*index).expect("annotation in range");
                let new_text = rewrite_turn(
                    gateway,
                    generator,
                    TemplateId::TransformName,
                    &[
                        ("target_name", name),
                        ("turn", &turn.text),
                        ("left", &context_line(transcript, index - 1)),
                        ("right", &context_line(transcript, index + 1)),
                    ],
                )?;
                planned.push((*index, new_text));
            }
        }
        (ConditionPayload::Style { category }, _) => {
            let targets = match dimension.name {
                DimensionName::CommunicativeStyle => &annotation.directness_turns,
                DimensionName::Politeness => &annotation.politeness_turns,
                DimensionName::Formality => &annotation.formality_turns,
                DimensionName::EmotionalLabor => &annotation.emotional_labor_turns,
                other => {
                    return Err(ungeneratable(
                        transcript,
                        dimension,
                        condition,
                        &format!("style payload on unexpected dimension {other}"),
                    ))
                }
            };
            if targets.is_empty() {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "no turns flagged for this style dimension",
                ));
            }
            for index in targets {
                let turn = transcript.turn(*index).expect("annotation in range");
                let new_text = rewrite_turn(
                    gateway,
                    generator,
                    TemplateId::TransformStyle,
                    &[
                        ("category", category),
                        ("turn", &turn.text),
                        ("left", &context_line(transcript, index - 1)),
                        ("right", &context_line(transcript, index + 1)),
                    ],
                )?;
                planned.push((*index, new_text));
            }
        }
        (payload, _) => {
            return Err(ungeneratable(
                transcript,
                dimension,
                condition,
                &format!("payload {payload:?} is not a turn transformation"),
            ))
        }
    }

    let (variant, edits) = apply_edits(transcript, &planned);
    Ok(CounterfactualVariant {
        source_id: transcript.id.clone(),
        dimension: dimension.name,
        condition: condition.label.clone(),
        transcript: variant,
        provenance: Provenance {
            edits,
            header: None,
        },
        validation: ValidationStatus::Rejected, // pending the gate
        attempts: 1,
    })
}

fn sample_agent_turn(transcript: &Transcript, seed: u64) -> Option<u32> {
    let agents = transcript.agent_turn_indices();
    if agents.is_empty() {
        None
    } else {
        Some(agents[(seed % agents.len() as u64) as usize])
    }
}

fn parse_inserted_turn(raw_turn: &str) -> (Speaker, String) {
    let lowered = raw_turn.trim_start();
    if let Some(rest) = lowered.strip_prefix("customer:").or_else(|| {
        lowered
            .strip_prefix("Customer:")
            .or_else(|| lowered.strip_prefix("CUSTOMER:"))
    }) {
        return (Speaker::Customer, rest.trim().to_string());
    }
    if let Some(rest) = lowered.strip_prefix("agent:").or_else(|| {
        lowered
            .strip_prefix("Agent:")
            .or_else(|| lowered.strip_prefix("AGENT:"))
    }) {
        return (Speaker::Agent, rest.trim().to_string());
    }
    (Speaker::Agent, lowered.trim().to_string())
}

/// Operation 2: introduce attributes not present in the source, either by
/// rewriting sampled turns with cues (ethnicity/religion, optionally after a
/// name swap) or by inserting a short exchange (disability). Inserted turns
/// renumber the transcript contiguously.
#[allow(clippy::too_many_arguments)]
pub fn inject_cues(
    transcript: &Transcript,
    annotation: &TurnAnnotation,
    dimension: &FairnessDimension,
    condition: &Condition,
    gateway: &Gateway,
    generator: &ModelSpec,
    pools: &AttributePools,
    seed: u64,
) -> Result<CounterfactualVariant, GenerationError> {
    debug_assert_eq!(dimension.operation, GenerationOperation::ContextInjection);
    let resolved = resolve_payload(condition, pools, seed)?;

    match (&condition.payload, &resolved) {
        (ConditionPayload::Original, _) => Ok(untouched_variant(transcript, dimension, condition)),
        (
            ConditionPayload::EthnicNameWithCues { .. },
            ResolvedPayload::NameAndCue { name, cue },
        )
        | (
            ConditionPayload::ReligiousNameWithCues { .. },
            ResolvedPayload::NameAndCue { name, cue },
        ) => {
            let is_religion =
                matches!(condition.payload, ConditionPayload::ReligiousNameWithCues { .. });
            let cue_targets = if is_religion {
                &annotation.religion_turns
            } else {
                &annotation.race_turns
            };
            let cue_turn = cue_targets
                .first()
                .copied()
                .or_else(|| sample_agent_turn(transcript, seed));
            let Some(cue_turn) = cue_turn else {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "no turn available for cue injection",
                ));
            };

            let mut planned: Vec<(u32, String)> = Vec::new();
            for index in &annotation.name_turns {
                let turn = transcript.turn(*index).expect("annotation in range");
                let new_text = rewrite_turn(
                    gateway,
                    generator,
                    TemplateId::TransformName,
                    &[
                        ("target_name", name),
                        ("turn", &turn.text),
                        ("left", &context_line(transcript, index - 1)),
                        ("right", &context_line(transcript, index + 1)),
                    ],
                )?;
                planned.push((*index, new_text));
            }

            let template = if is_religion {
                TemplateId::InjectReligion
            } else {
                TemplateId::InjectEthnicity
            };
            let base_text = planned
                .iter()
                .find(|(i, _)| *i == cue_turn)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| transcript.turn(cue_turn).expect("in range").text.clone());
            let injected = rewrite_turn(
                gateway,
                generator,
                template,
                &[
                    ("target", &condition.label),
                    ("turn", &base_text),
                    ("cues", cue),
                    ("left", &context_line(transcript, cue_turn - 1)),
                    ("right", &context_line(transcript, cue_turn + 1)),
                ],
            )?;
            planned.retain(|(i, _)| *i != cue_turn);
            planned.push((cue_turn, injected));

            let (variant, edits) = apply_edits(transcript, &planned);
            if edits.is_empty() {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "cue injection produced no textual change",
                ));
            }
            Ok(CounterfactualVariant {
                source_id: transcript.id.clone(),
                dimension: dimension.name,
                condition: condition.label.clone(),
                transcript: variant,
                provenance: Provenance {
                    edits,
                    header: None,
                },
                validation: ValidationStatus::Rejected,
                attempts: 1,
            })
        }
        (ConditionPayload::DisabilityCues, ResolvedPayload::Cue(cue)) => {
            let anchor = annotation
                .disability_turns
                .first()
                .copied()
                .or_else(|| sample_agent_turn(transcript, seed));
            let Some(anchor) = anchor else {
                return Err(ungeneratable(
                    transcript,
                    dimension,
                    condition,
                    "no agent turn available as insertion point",
                ));
            };
            let prompt = gateway.prompts().render(
                TemplateId::InjectDisability,
                &[
                    ("cues", cue),
                    ("left", &context_line(transcript, anchor)),
                    ("right", &context_line(transcript, anchor + 1)),
                ],
            );
            let raw = gateway.complete_uncached(&prompt, generator)?;
            let inserted = parse_trans_turns(&raw)?;
            if inserted.len() > 3 {
                return Err(GenerationError::BadReply {
                    message: format!("expected 1-3 inserted turns, got {}", inserted.len()),
                    raw,
                });
            }

            let mut turns = Vec::with_capacity(transcript.turns.len() + inserted.len());
            let mut edits = Vec::new();
            for turn in &transcript.turns {
                turns.push(turn.clone());
                if turn.index == anchor {
                    for text in &inserted {
                        let (speaker, text) = parse_inserted_turn(text);
                        turns.push(Turn::new(0, speaker, text));
                    }
                }
            }
            for (pos, turn) in turns.iter_mut().enumerate() {
                turn.index = pos as u32 + 1;
            }
            for (offset, text) in inserted.iter().enumerate() {
                let (_, cleaned) = parse_inserted_turn(text);
                edits.push(TurnEdit {
                    index: anchor + 1 + offset as u32,
                    original: String::new(),
                    new: cleaned,
                });
            }

            let mut variant = transcript.clone();
            variant.turns = turns;
            Ok(CounterfactualVariant {
                source_id: transcript.id.clone(),
                dimension: dimension.name,
                condition: condition.label.clone(),
                transcript: variant,
                provenance: Provenance {
                    edits,
                    header: None,
                },
                validation: ValidationStatus::Rejected,
                attempts: 1,
            })
        }
        (payload, _) => Err(ungeneratable(
            transcript,
            dimension,
            condition,
            &format!("payload {payload:?} is not a context injection"),
        )),
    }
}

/// Operation 3: prepend a literal metadata header, leaving every turn
/// byte-identical to the source. Deterministic, so no validation is needed.
pub fn append_metadata(
    transcript: &Transcript,
    dimension: &FairnessDimension,
    condition: &Condition,
    pools: &AttributePools,
) -> Result<CounterfactualVariant, GenerationError> {
    debug_assert_eq!(dimension.operation, GenerationOperation::MetadataAppending);
    let resolved = resolve_payload(condition, pools, 0)?;
    let ResolvedPayload::Metadata(header) = resolved else {
        return Err(ungeneratable(
            transcript,
            dimension,
            condition,
            "condition payload is not a metadata template",
        ));
    };
    let mut variant = transcript.clone();
    variant.header = Some(header.clone());
    Ok(CounterfactualVariant {
        source_id: transcript.id.clone(),
        dimension: dimension.name,
        condition: condition.label.clone(),
        transcript: variant,
        provenance: Provenance {
            edits: Vec::new(),
            header: Some(header),
        },
        validation: ValidationStatus::NotRequired,
        attempts: 1,
    })
}

fn excerpt(transcript: &Transcript, indices: &[u32]) -> String {
    let mut wanted: Vec<u32> = indices
        .iter()
        .flat_map(|i| [i.saturating_sub(1), *i, i + 1])
        .filter(|i| *i >= 1 && *i <= transcript.turns.len() as u32)
        .collect();
    wanted.sort_unstable();
    wanted.dedup();
    wanted
        .iter()
        .filter_map(|i| transcript.turn(*i))
        .map(|t| format!("{}: {}: {}", t.index, t.speaker, t.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The semantic-equivalence gate. An unparseable validator reply is treated
/// as not-equivalent and logged: the gate fails closed.
pub fn validate_equivalence(
    source: &Transcript,
    variant: &CounterfactualVariant,
    gateway: &Gateway,
    validator: &ModelSpec,
    scope: ValidationScope,
) -> Result<Verdict, GenerationError> {
    let (original, modified) = match scope {
        ValidationScope::FullTranscript => {
            (render_transcript(source), render_transcript(&variant.transcript))
        }
        ValidationScope::EditedWithContext => {
            let variant_indices: Vec<u32> =
                variant.provenance.edits.iter().map(|e| e.index).collect();
            let source_indices: Vec<u32> = variant
                .provenance
                .edits
                .iter()
                .filter(|e| !e.original.is_empty())
                .map(|e| e.index)
                .collect();
            let source_indices = if source_indices.is_empty() {
                // Pure insertion: show the source turns around the splice.
                variant_indices
                    .iter()
                    .map(|i| i.saturating_sub(1).max(1))
                    .collect()
            } else {
                source_indices
            };
            (
                excerpt(source, &source_indices),
                excerpt(&variant.transcript, &variant_indices),
            )
        }
    };
    let prompt = gateway.prompts().render(
        TemplateId::SemanticEquivalence,
        &[("original", &original), ("modified", &modified)],
    );
    let raw = gateway.complete_uncached(&prompt, validator)?;
    match parse_verdict(&raw) {
        Ok(verdict) => Ok(verdict),
        Err(failure) => {
            log::warn!(
                "validator reply did not normalize to a verdict; rejecting conservatively: {:?}",
                failure.raw
            );
            Ok(Verdict::NotEquivalent)
        }
    }
}

/// Outcome of generating one dimension for one transcript.
#[derive(Debug, Default)]
pub struct DimensionGeneration {
    pub variants: Vec<CounterfactualVariant>,
    pub stats: RejectionStats,
    pub skipped: Vec<String>,
}

/// Generate variants for every condition of a dimension, running the
/// semantic gate with up to `max_attempts` tries per condition. The first
/// accepted attempt wins; a condition whose attempts are all rejected is
/// absent from the result and visible only in the stats.
pub fn generate_dimension_variants(
    transcript: &Transcript,
    dimension: &FairnessDimension,
    gateway: &Gateway,
    models: &GenerationModels,
    pools: &AttributePools,
    config: &GenerationConfig,
) -> Result<DimensionGeneration, GenerationError> {
    let mut outcome = DimensionGeneration::default();

    let annotation = match dimension.operation {
        GenerationOperation::MetadataAppending => TurnAnnotation::default(),
        _ => annotate_turns(transcript, gateway, &models.identifier)?,
    };

    for condition in &dimension.conditions {
        if dimension.operation == GenerationOperation::MetadataAppending {
            let variant = append_metadata(transcript, dimension, condition, pools)?;
            let counts = outcome.stats.counts(dimension.name);
            counts.generated += 1;
            counts.accepted += 1;
            outcome.variants.push(variant);
            continue;
        }
        if matches!(condition.payload, ConditionPayload::Original) {
            let variant = untouched_variant(transcript, dimension, condition);
            let counts = outcome.stats.counts(dimension.name);
            counts.generated += 1;
            counts.accepted += 1;
            outcome.variants.push(variant);
            continue;
        }

        let mut accepted = None;
        for attempt in 1..=config.max_attempts {
            let attempt_seed = mix_seed(
                config.seed,
                &[&transcript.id, dimension.name.as_str(), &condition.label],
                attempt,
            );
            let produced = match dimension.operation {
                GenerationOperation::TurnTransformation => transform_turns(
                    transcript,
                    &annotation,
                    dimension,
                    condition,
                    gateway,
                    &models.generator,
                    pools,
                    attempt_seed,
                ),
                GenerationOperation::ContextInjection => inject_cues(
                    transcript,
                    &annotation,
                    dimension,
                    condition,
                    gateway,
                    &models.generator,
                    pools,
                    attempt_seed,
                ),
                GenerationOperation::MetadataAppending => unreachable!("handled above"),
            };
            let mut variant = match produced {
                Ok(v) => v,
                Err(GenerationError::Ungeneratable { reason, .. }) => {
                    log::info!(
                        "skipping {}/{} for {}: {reason}",
                        dimension.name,
                        condition.label,
                        transcript.id
                    );
                    outcome.stats.counts(dimension.name).skipped += 1;
                    outcome.skipped.push(format!(
                        "{}/{}/{}: {reason}",
                        transcript.id, dimension.name, condition.label
                    ));
                    break;
                }
                Err(GenerationError::BadReply { message, raw }) => {
                    // A malformed generation reply burns the attempt and is
                    // counted with the rejections so accounting stays whole.
                    log::warn!(
                        "attempt {attempt} for {}/{} returned malformed output: {message}",
                        dimension.name,
                        condition.label
                    );
                    let _ = raw;
                    let counts = outcome.stats.counts(dimension.name);
                    counts.generated += 1;
                    counts.llm_rejected += 1;
                    continue;
                }
                Err(other) => return Err(other),
            };
            let counts = outcome.stats.counts(dimension.name);
            counts.generated += 1;
            let verdict = validate_equivalence(
                transcript,
                &variant,
                gateway,
                &models.validator,
                config.validation_scope,
            )?;
            match verdict {
                Verdict::Equivalent => {
                    variant.validation = ValidationStatus::Accepted;
                    variant.attempts = attempt;
                    counts.accepted += 1;
                    accepted = Some(variant);
                    break;
                }
                Verdict::NotEquivalent => {
                    counts.llm_rejected += 1;
                }
            }
        }
        if let Some(variant) = accepted {
            outcome.variants.push(variant);
        }
    }

    Ok(outcome)
}

/// Line-delimited variant store keyed by (source_id, dimension, condition).
pub fn save_variant_store(
    variants: &[CounterfactualVariant],
    path: &Path,
) -> Result<(), GenerationError> {
    let file = File::create(path).map_err(|e| GenerationError::Store(e.to_string()))?;
    let mut writer = BufWriter::new(file);
    for variant in variants {
        let line = serde_json::to_string(variant).expect("variant serializes");
        writeln!(writer, "{line}").map_err(|e| GenerationError::Store(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| GenerationError::Store(e.to_string()))
}

pub fn load_variant_store(path: &Path) -> Result<Vec<CounterfactualVariant>, GenerationError> {
    let file = File::open(path).map_err(|e| GenerationError::Store(e.to_string()))?;
    let reader = BufReader::new(file);
    let mut variants: Vec<CounterfactualVariant> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (pos, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| GenerationError::Store(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let variant: CounterfactualVariant = serde_json::from_str(&line)
            .map_err(|e| GenerationError::Store(format!("line {}: {e}", pos + 1)))?;
        if !seen.insert(variant.key()) {
            return Err(GenerationError::Store(format!(
                "duplicate variant key {:?} at line {}",
                variant.key(),
                pos + 1
            )));
        }
        variants.push(variant);
    }
    Ok(variants)
}

/// Human-readable diff of one accepted variant, for the review export
/// consumed by human auditors.
pub fn render_review_diff(variant: &CounterfactualVariant) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "source: {}\ndimension: {}\ncondition: {}\nattempts: {}\n\n",
        variant.source_id, variant.dimension, variant.condition, variant.attempts
    ));
    if let Some(header) = &variant.provenance.header {
        for (key, value) in &header.entries {
            out.push_str(&format!("+ header {key}: {value}\n"));
        }
    }
    for edit in &variant.provenance.edits {
        if edit.original.is_empty() {
            out.push_str(&format!("+ {}: {}\n", edit.index, edit.new));
        } else {
            out.push_str(&format!("- {}: {}\n", edit.index, edit.original));
            out.push_str(&format!("+ {}: {}\n", edit.index, edit.new));
        }
    }
    if variant.provenance.edits.is_empty() && variant.provenance.header.is_none() {
        out.push_str("(identical to source)\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Speaker;
    use crate::gateway::mock::MockEvaluator;
    use crate::gateway::provider::{FnProvider, ScriptedProvider};
    use crate::gateway::Gateway;
    use crate::taxonomy::{dimension, dimensions};
    use std::sync::Arc;

    fn sample_transcript() -> Transcript {
        crate::fixtures::sample_transcript(0, 7)
    }

    fn mock_gateway() -> Gateway {
        Gateway::builder()
            .provider("gen", Arc::new(MockEvaluator::by_prompt()))
            .provider("val", Arc::new(MockEvaluator::by_prompt()))
            .build()
            .unwrap()
    }

    fn gateway_with_validator(replies: Vec<&str>) -> Gateway {
        Gateway::builder()
            .provider("gen", Arc::new(MockEvaluator::by_prompt()))
            .provider("val", Arc::new(ScriptedProvider::new(replies)))
            .build()
            .unwrap()
    }

    fn models() -> GenerationModels {
        GenerationModels {
            identifier: ModelSpec::new("identifier", "gen"),
            generator: ModelSpec::new("generator", "gen"),
            validator: ModelSpec::new("validator", "val"),
        }
    }

    #[test]
    fn annotation_finds_name_and_cue_turns() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let annotation =
            annotate_turns(&transcript, &gateway, &models().identifier).unwrap();
        assert_eq!(annotation.agent_name, "monica");
        assert!(annotation.name_turns.contains(&1));
        assert!(!annotation.politeness_turns.is_empty());
        assert!(!annotation.directness_turns.is_empty());
        assert_eq!(annotation.gender_turns.len(), annotation.agent_pronouns.len());
    }

    #[test]
    fn annotation_without_gendered_words_yields_empty_aligned_lists() {
        let transcript = Transcript::new(
            "t-plain",
            vec![
                Turn::new(1, Speaker::Agent, "hello this is alex from support"),
                Turn::new(2, Speaker::Customer, "hi i need help"),
            ],
        );
        let gateway = mock_gateway();
        let annotation =
            annotate_turns(&transcript, &gateway, &models().identifier).unwrap();
        assert!(annotation.gender_turns.is_empty());
        assert!(annotation.agent_pronouns.is_empty());
    }

    #[test]
    fn annotation_drops_out_of_range_indices() {
        let reply = r#"{"agent_name":"monica","name_turns":[1,99],"gender_turns":[2,50],"agent_pronouns":["sir","sir"]}"#;
        let gateway = Gateway::builder()
            .provider(
                "gen",
                Arc::new(FnProvider(move |_: &str, _: &crate::gateway::GenerationParams| {
                    Ok(reply.to_string())
                })),
            )
            .build()
            .unwrap();
        let transcript = sample_transcript();
        let annotation =
            annotate_turns(&transcript, &gateway, &ModelSpec::new("id", "gen")).unwrap();
        assert_eq!(annotation.name_turns, vec![1]);
        assert_eq!(annotation.gender_turns, vec![2]);
        assert_eq!(annotation.agent_pronouns, vec!["sir".to_string()]);
    }

    #[test]
    fn annotation_garbage_is_typed_error_with_raw() {
        let gateway = Gateway::builder()
            .provider(
                "gen",
                Arc::new(FnProvider(|_: &str, _: &crate::gateway::GenerationParams| {
                    Ok("not json at all".to_string())
                })),
            )
            .build()
            .unwrap();
        let transcript = sample_transcript();
        match annotate_turns(&transcript, &gateway, &ModelSpec::new("id", "gen")) {
            Err(GenerationError::Annotation { raw, .. }) => {
                assert_eq!(raw, "not json at all")
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn name_swap_edits_only_annotated_turn() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::AgentEthnicityName);
        let condition = dim.condition("White").unwrap();
        let pools = AttributePools::builtin();
        let variant = transform_turns(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap();
        assert_eq!(variant.provenance.edits.len(), annotation.name_turns.len());
        let edited: Vec<u32> = variant.provenance.edits.iter().map(|e| e.index).collect();
        for (source_turn, variant_turn) in transcript.turns.iter().zip(&variant.transcript.turns) {
            if edited.contains(&source_turn.index) {
                assert_ne!(source_turn.text, variant_turn.text);
                assert!(variant_turn.text.contains("barbara baker"));
            } else {
                assert_eq!(source_turn.text, variant_turn.text);
            }
        }
    }

    #[test]
    fn gender_swap_touches_gendered_customer_turns() {
        let gateway = mock_gateway();
        let transcript = sample_transcript(); // even index -> female agent, ma'am turns
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::AgentGender);
        let condition = dim.condition("Male").unwrap();
        let pools = AttributePools::builtin();
        let variant = transform_turns(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap();
        let gendered_edit = variant
            .provenance
            .edits
            .iter()
            .find(|e| e.original.contains("ma'am"))
            .expect("a gendered turn was edited");
        assert!(gendered_edit.new.contains("sir"));
        assert!(!gendered_edit.new.contains("ma'am"));
    }

    #[test]
    fn original_condition_is_identity_and_not_validated() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::Politeness);
        let condition = dim.condition("Original").unwrap();
        let pools = AttributePools::builtin();
        let variant = transform_turns(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap();
        assert_eq!(variant.transcript, transcript);
        assert_eq!(variant.validation, ValidationStatus::NotRequired);
        assert!(variant.provenance.edits.is_empty());
    }

    #[test]
    fn missing_name_mention_is_ungeneratable_skip() {
        let transcript = Transcript::new(
            "t-anon",
            vec![
                Turn::new(1, Speaker::Agent, "support line how can i help"),
                Turn::new(2, Speaker::Customer, "my invoice is wrong"),
            ],
        );
        let gateway = mock_gateway();
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::AgentReligionName);
        let condition = dim.condition("Islam").unwrap();
        let pools = AttributePools::builtin();
        let err = transform_turns(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, GenerationError::Ungeneratable { .. }));
    }

    #[test]
    fn religion_cue_injection_appends_cue_text() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::AgentReligionCues);
        let condition = dim.condition("Christianity").unwrap();
        let pools = AttributePools::builtin();
        let variant = inject_cues(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap();
        let cue_edit = variant
            .provenance
            .edits
            .iter()
            .find(|e| e.new.contains("God bless"))
            .expect("cue appended somewhere");
        assert!(cue_edit.new.starts_with(&cue_edit.original[..cue_edit.original.len().min(10)]));
        // Name part also swapped when a name turn exists.
        assert!(variant
            .provenance
            .edits
            .iter()
            .any(|e| e.index == 1));
    }

    #[test]
    fn disability_insertion_renumbers_contiguously() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let m = models();
        let annotation = annotate_turns(&transcript, &gateway, &m.identifier).unwrap();
        let dim = dimension(DimensionName::AgentDisability);
        let condition = dim.condition("Disabled").unwrap();
        let pools = AttributePools::builtin();
        let variant = inject_cues(
            &transcript,
            &annotation,
            &dim,
            condition,
            &gateway,
            &m.generator,
            &pools,
            0,
        )
        .unwrap();
        assert!(variant.transcript.turns.len() > transcript.turns.len());
        assert!(variant.transcript.turns.len() <= transcript.turns.len() + 3);
        variant.transcript.validate().unwrap();
        for (pos, turn) in variant.transcript.turns.iter().enumerate() {
            assert_eq!(turn.index, pos as u32 + 1);
        }
        // Inserted edits carry empty originals.
        assert!(variant.provenance.edits.iter().all(|e| e.original.is_empty()));
    }

    #[test]
    fn metadata_appending_keeps_turns_byte_identical() {
        let transcript = sample_transcript();
        let pools = AttributePools::builtin();
        let dim = dimension(DimensionName::PastPerformance);
        let condition = dim.condition("Improving Performance").unwrap();
        let variant = append_metadata(&transcript, &dim, condition, &pools).unwrap();
        assert_eq!(variant.transcript.turns, transcript.turns);
        assert_eq!(variant.validation, ValidationStatus::NotRequired);
        let header = variant.transcript.header.as_ref().unwrap();
        assert!(header.entries[0].1.contains("65 → 80"));
        assert_eq!(variant.provenance.header.as_ref(), Some(header));
    }

    #[test]
    fn trainee_profile_template_matches_pools() {
        let transcript = sample_transcript();
        let pools = AttributePools::builtin();
        let dim = dimension(DimensionName::AgentProfile);
        let condition = dim.condition("Trainee").unwrap();
        let variant = append_metadata(&transcript, &dim, condition, &pools).unwrap();
        let header = variant.transcript.header.unwrap();
        assert_eq!(
            header.entries,
            vec![
                ("Agent Role".to_string(), "Trainee".to_string()),
                ("Agent Tenure".to_string(), "2 weeks".to_string()),
            ]
        );
    }

    #[test]
    fn validator_equivalent_accepts_and_garbage_rejects() {
        let transcript = sample_transcript();
        let m = models();
        let pools = AttributePools::builtin();
        let make_variant = |gateway: &Gateway| {
            let annotation = annotate_turns(&transcript, gateway, &m.identifier).unwrap();
            let dim = dimension(DimensionName::AgentEthnicityName);
            transform_turns(
                &transcript,
                &annotation,
                &dim,
                dim.condition("Hispanic").unwrap(),
                gateway,
                &m.generator,
                &pools,
                0,
            )
            .unwrap()
        };

        let gateway = gateway_with_validator(vec!["EQUIVALENT"]);
        let variant = make_variant(&gateway);
        let verdict = validate_equivalence(
            &transcript,
            &variant,
            &gateway,
            &m.validator,
            ValidationScope::EditedWithContext,
        )
        .unwrap();
        assert_eq!(verdict, Verdict::Equivalent);

        let gateway = gateway_with_validator(vec!["DIFFERENT"]);
        let variant = make_variant(&gateway);
        let verdict = validate_equivalence(
            &transcript,
            &variant,
            &gateway,
            &m.validator,
            ValidationScope::EditedWithContext,
        )
        .unwrap();
        assert_eq!(verdict, Verdict::NotEquivalent);

        // Garbage reply falls back to the conservative rejection.
        let gateway = gateway_with_validator(vec!["hmm, looks fine to me"]);
        let variant = make_variant(&gateway);
        let verdict = validate_equivalence(
            &transcript,
            &variant,
            &gateway,
            &m.validator,
            ValidationScope::FullTranscript,
        )
        .unwrap();
        assert_eq!(verdict, Verdict::NotEquivalent);
    }

    #[test]
    fn gender_generation_accepted_with_zero_rejections() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let dim = dimension(DimensionName::AgentGender);
        let pools = AttributePools::builtin();
        let outcome = generate_dimension_variants(
            &transcript,
            &dim,
            &gateway,
            &models(),
            &pools,
            &GenerationConfig::default(),
        )
        .unwrap();
        assert_eq!(outcome.variants.len(), 2);
        let counts = outcome.stats.per_dimension["agent_gender"];
        assert_eq!(counts.generated, 2);
        assert_eq!(counts.accepted, 2);
        assert_eq!(counts.llm_rejected, 0);
        assert_eq!(counts.rejection_rate_percent(), Some(0.0));
    }

    #[test]
    fn reject_then_accept_records_two_attempts() {
        // Gender has two conditions; the first condition burns one rejection.
        let gateway = gateway_with_validator(vec!["DIFFERENT", "EQUIVALENT", "EQUIVALENT"]);
        let transcript = sample_transcript();
        let dim = dimension(DimensionName::AgentGender);
        let pools = AttributePools::builtin();
        let outcome = generate_dimension_variants(
            &transcript,
            &dim,
            &gateway,
            &models(),
            &pools,
            &GenerationConfig::default(),
        )
        .unwrap();
        assert_eq!(outcome.variants.len(), 2);
        assert_eq!(outcome.variants[0].attempts, 2);
        assert_eq!(outcome.variants[1].attempts, 1);
        let counts = outcome.stats.per_dimension["agent_gender"];
        assert_eq!(counts.generated, 3);
        assert_eq!(counts.llm_rejected, 1);
        assert_eq!(counts.accepted, 2);
    }

    #[test]
    fn three_rejections_drop_the_condition() {
        let gateway = gateway_with_validator(vec![
            "DIFFERENT", "DIFFERENT", "DIFFERENT", // first condition exhausted
            "EQUIVALENT", // second condition accepted
        ]);
        let transcript = sample_transcript();
        let dim = dimension(DimensionName::AgentGender);
        let pools = AttributePools::builtin();
        let outcome = generate_dimension_variants(
            &transcript,
            &dim,
            &gateway,
            &models(),
            &pools,
            &GenerationConfig::default(),
        )
        .unwrap();
        assert_eq!(outcome.variants.len(), 1);
        assert_eq!(outcome.variants[0].condition, "Female");
        let counts = outcome.stats.per_dimension["agent_gender"];
        assert_eq!(counts.generated, 4);
        assert_eq!(counts.llm_rejected, 3);
        assert_eq!(counts.accepted, 1);
        for variant in &outcome.variants {
            assert!(variant.attempts <= 3);
        }
    }

    #[test]
    fn generation_is_deterministic_for_fixed_inputs() {
        let run = || {
            let gateway = mock_gateway();
            let transcript = sample_transcript();
            let dim = dimension(DimensionName::AgentReligionCues);
            let pools = AttributePools::builtin();
            generate_dimension_variants(
                &transcript,
                &dim,
                &gateway,
                &models(),
                &pools,
                &GenerationConfig {
                    seed: 11,
                    ..GenerationConfig::default()
                },
            )
            .unwrap()
            .variants
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn every_dimension_generates_for_the_fixture_transcript() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let pools = AttributePools::builtin();
        for dim in dimensions() {
            let outcome = generate_dimension_variants(
                &transcript,
                &dim,
                &gateway,
                &models(),
                &pools,
                &GenerationConfig::default(),
            )
            .unwrap();
            assert_eq!(
                outcome.variants.len(),
                dim.conditions.len(),
                "dimension {} generated {} of {} conditions",
                dim.name,
                outcome.variants.len(),
                dim.conditions.len()
            );
        }
    }

    #[test]
    fn variant_store_roundtrip_rejects_duplicates() {
        let gateway = mock_gateway();
        let transcript = sample_transcript();
        let dim = dimension(DimensionName::AgentGender);
        let pools = AttributePools::builtin();
        let outcome = generate_dimension_variants(
            &transcript,
            &dim,
            &gateway,
            &models(),
            &pools,
            &GenerationConfig::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variants.jsonl");
        save_variant_store(&outcome.variants, &path).unwrap();
        assert_eq!(load_variant_store(&path).unwrap(), outcome.variants);

        let mut dupes = outcome.variants.clone();
        dupes.push(outcome.variants[0].clone());
        save_variant_store(&dupes, &path).unwrap();
        assert!(load_variant_store(&path).is_err());
    }

    #[test]
    fn review_diff_shows_edits_and_headers() {
        let transcript = sample_transcript();
        let pools = AttributePools::builtin();
        let dim = dimension(DimensionName::CustomerProfile);
        let variant =
            append_metadata(&transcript, &dim, dim.condition("VIP Platinum").unwrap(), &pools)
                .unwrap();
        let diff = render_review_diff(&variant);
        assert!(diff.contains("+ header Customer Tier: VIP Platinum, High-Value Account"));
    }

    #[test]
    fn stats_merge_is_order_insensitive() {
        let mut a = RejectionStats::default();
        a.per_dimension.insert(
            "agent_gender".into(),
            DimensionCounts {
                generated: 3,
                llm_rejected: 1,
                accepted: 2,
                skipped: 0,
            },
        );
        let mut b = RejectionStats::default();
        b.per_dimension.insert(
            "agent_gender".into(),
            DimensionCounts {
                generated: 2,
                llm_rejected: 0,
                accepted: 2,
                skipped: 1,
            },
        );
        let mut ab = a.clone();
        ab.merge(&b);
        let mut ba = b.clone();
        ba.merge(&a);
        assert_eq!(ab, ba);
        let counts = ab.per_dimension["agent_gender"];
        assert_eq!(counts.generated, counts.llm_rejected + counts.accepted);
    }
}
