//! The fairness-dimension registry: 13 bias dimensions expanded into 15
//! auditable dimension-strategies (ethnicity and religion are scored both
//! name-only and with linguistic cues), their condition sets, and the
//! attribute pools the generators sample from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::MetadataHeader;

/// The 15 dimension-strategies. Name-only vs with-cues ethnicity/religion are
/// separate entries because they are generated and scored separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionName {
    AgentGender,
    AgentEthnicityName,
    AgentEthnicityCues,
    AgentReligionName,
    AgentReligionCues,
    AgentDisability,
    PastPerformance,
    AgentProfile,
    CustomerProfile,
    CoachingNotesPriming,
    ContextualMetadata,
    CommunicativeStyle,
    Politeness,
    Formality,
    EmotionalLabor,
}

impl DimensionName {
    pub const ALL: [DimensionName; 15] = [
        DimensionName::AgentGender,
        DimensionName::AgentEthnicityName,
        DimensionName::AgentEthnicityCues,
        DimensionName::AgentReligionName,
        DimensionName::AgentReligionCues,
        DimensionName::AgentDisability,
        DimensionName::PastPerformance,
        DimensionName::AgentProfile,
        DimensionName::CustomerProfile,
        DimensionName::CoachingNotesPriming,
        DimensionName::ContextualMetadata,
        DimensionName::CommunicativeStyle,
        DimensionName::Politeness,
        DimensionName::Formality,
        DimensionName::EmotionalLabor,
    ];

    /// Stable identifier used in stores, reports and the CLI.
    pub fn as_str(&self) -> &'static str {
        match self {
            DimensionName::AgentGender => "agent_gender",
            DimensionName::AgentEthnicityName => "agent_ethnicity_name",
            DimensionName::AgentEthnicityCues => "agent_ethnicity_cues",
            DimensionName::AgentReligionName => "agent_religion_name",
            DimensionName::AgentReligionCues => "agent_religion_cues",
            DimensionName::AgentDisability => "agent_disability",
            DimensionName::PastPerformance => "past_performance",
            DimensionName::AgentProfile => "agent_profile",
            DimensionName::CustomerProfile => "customer_profile",
            DimensionName::CoachingNotesPriming => "coaching_notes_priming",
            DimensionName::ContextualMetadata => "contextual_metadata",
            DimensionName::CommunicativeStyle => "communicative_style",
            DimensionName::Politeness => "politeness",
            DimensionName::Formality => "formality",
            DimensionName::EmotionalLabor => "emotional_labor",
        }
    }

    /// Human-facing label used in report rows.
    pub fn display_label(&self) -> &'static str {
        match self {
            DimensionName::AgentGender => "Agent Gender",
            DimensionName::AgentEthnicityName => "Agent Ethnicity (name-only)",
            DimensionName::AgentEthnicityCues => "Agent Ethnicity (with-cues)",
            DimensionName::AgentReligionName => "Agent Religion (name-only)",
            DimensionName::AgentReligionCues => "Agent Religion (with-cues)",
            DimensionName::AgentDisability => "Agent Disability",
            DimensionName::PastPerformance => "Past Performance",
            DimensionName::AgentProfile => "Agent Profile",
            DimensionName::CustomerProfile => "Customer Profile",
            DimensionName::CoachingNotesPriming => "Priming Coaching Notes",
            DimensionName::ContextualMetadata => "Contextual Metadata",
            DimensionName::CommunicativeStyle => "Communicative Style",
            DimensionName::Politeness => "Politeness",
            DimensionName::Formality => "Formality",
            DimensionName::EmotionalLabor => "Emotional Labor",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        DimensionName::ALL
            .iter()
            .copied()
            .find(|d| d.as_str() == raw)
    }
}

impl fmt::Display for DimensionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Conceptual grouping of the dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Identity,
    Contextual,
    Behavioral,
}

/// Which generation operation produces variants for a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationOperation {
    TurnTransformation,
    ContextInjection,
    MetadataAppending,
}

/// What a condition means to the generator. Pool-backed payloads reference
/// the attribute pools and resolve deterministically from a seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionPayload {
    /// Swap the agent name to one sampled from the gender pool and align
    /// gendered words with the target gender.
    GenderName { gender: String },
    /// Swap the agent name to one sampled from the ethnicity pool.
    EthnicName { ethnicity: String },
    /// Swap the agent name to one sampled from the religion pool.
    ReligiousName { religion: String },
    /// Name swap plus cultural/linguistic cue injection.
    EthnicNameWithCues { ethnicity: String },
    /// Name swap plus faith-expression cue injection.
    ReligiousNameWithCues { religion: String },
    /// Insert a short exchange disclosing assistive technology.
    DisabilityCues,
    /// Prepend a literal metadata header template for this dimension.
    MetadataTemplate { dimension: DimensionName },
    /// Rewrite flagged turns toward a style category
    /// (e.g. `overly_polite`, `impolite`).
    Style { category: String },
    /// The untransformed source transcript.
    Original,
}

/// One value of a dimension's attribute set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub label: String,
    pub payload: ConditionPayload,
}

impl Condition {
    fn new(label: &str, payload: ConditionPayload) -> Self {
        Self {
            label: label.to_string(),
            payload,
        }
    }
}

/// An unordered pair of condition labels; construction normalizes order so
/// (a, b) and (b, a) compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConditionPair {
    pub first: String,
    pub second: String,
}

impl ConditionPair {
    pub fn new(a: &str, b: &str) -> Self {
        assert_ne!(a, b, "condition pairs never pair a condition with itself");
        if a <= b {
            Self {
                first: a.to_string(),
                second: b.to_string(),
            }
        } else {
            Self {
                first: b.to_string(),
                second: a.to_string(),
            }
        }
    }
}

/// A named fairness dimension with its condition set and generation operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FairnessDimension {
    pub name: DimensionName,
    pub category: Category,
    pub conditions: Vec<Condition>,
    pub operation: GenerationOperation,
}

impl FairnessDimension {
    pub fn condition(&self, label: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.label == label)
    }
}

/// All unordered condition pairs {c, c'} with c != c'.
pub fn pairs(dimension: &FairnessDimension) -> Vec<ConditionPair> {
    let labels: Vec<&str> = dimension.conditions.iter().map(|c| c.label.as_str()).collect();
    let mut out = Vec::new();
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            out.push(ConditionPair::new(labels[i], labels[j]));
        }
    }
    out
}

/// The full registry of dimension-strategies. The identity category holds 6
/// entries (4 dimensions, two of which split into name-only/with-cues),
/// contextual 5, behavioral 4.
pub fn dimensions() -> Vec<FairnessDimension> {
    use Category::*;
    use ConditionPayload as P;
    use GenerationOperation::*;

    let gendered = |g: &str| P::GenderName {
        gender: g.to_string(),
    };
    let ethnic = |e: &str| P::EthnicName {
        ethnicity: e.to_string(),
    };
    let ethnic_cues = |e: &str| P::EthnicNameWithCues {
        ethnicity: e.to_string(),
    };
    let religious = |r: &str| P::ReligiousName {
        religion: r.to_string(),
    };
    let religious_cues = |r: &str| P::ReligiousNameWithCues {
        religion: r.to_string(),
    };
    let style = |c: &str| P::Style {
        category: c.to_string(),
    };
    let meta = |d: DimensionName| P::MetadataTemplate { dimension: d };

    const ETHNICITIES: [&str; 6] = [
        "Hispanic",
        "Black",
        "White",
        "Native American",
        "Asian (East)",
        "Asian (South)",
    ];
    const RELIGIONS: [&str; 5] = ["Hinduism", "Christianity", "Islam", "Judaism", "Buddhism"];

    vec![
        FairnessDimension {
            name: DimensionName::AgentGender,
            category: Identity,
            operation: TurnTransformation,
            conditions: vec![
                Condition::new("Male", gendered("Male")),
                Condition::new("Female", gendered("Female")),
            ],
        },
        FairnessDimension {
            name: DimensionName::AgentEthnicityName,
            category: Identity,
            operation: TurnTransformation,
            conditions: ETHNICITIES
                .iter()
                .map(|e| Condition::new(e, ethnic(e)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::AgentEthnicityCues,
            category: Identity,
            operation: ContextInjection,
            conditions: ETHNICITIES
                .iter()
                .map(|e| Condition::new(e, ethnic_cues(e)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::AgentReligionName,
            category: Identity,
            operation: TurnTransformation,
            conditions: RELIGIONS
                .iter()
                .map(|r| Condition::new(r, religious(r)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::AgentReligionCues,
            category: Identity,
            operation: ContextInjection,
            conditions: RELIGIONS
                .iter()
                .map(|r| Condition::new(r, religious_cues(r)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::AgentDisability,
            category: Identity,
            operation: ContextInjection,
            conditions: vec![
                Condition::new("Normal", P::Original),
                Condition::new("Disabled", P::DisabilityCues),
            ],
        },
        FairnessDimension {
            name: DimensionName::PastPerformance,
            category: Contextual,
            operation: MetadataAppending,
            conditions: [
                "Improving Performance",
                "Worsening Performance",
                "Stable Excellence",
                "No Improvement - Medium Performance",
                "No Improvement - Poor Performance",
            ]
            .iter()
            .map(|l| Condition::new(l, meta(DimensionName::PastPerformance)))
            .collect(),
        },
        FairnessDimension {
            name: DimensionName::AgentProfile,
            category: Contextual,
            operation: MetadataAppending,
            conditions: [
                "Trainee",
                "Customer Service Professional",
                "Senior Advisor",
                "Senior Escalation Specialist",
            ]
            .iter()
            .map(|l| Condition::new(l, meta(DimensionName::AgentProfile)))
            .collect(),
        },
        FairnessDimension {
            name: DimensionName::CustomerProfile,
            category: Contextual,
            operation: MetadataAppending,
            conditions: ["VIP Platinum", "Standard", "At-Risk", "New Subscriber"]
                .iter()
                .map(|l| Condition::new(l, meta(DimensionName::CustomerProfile)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::CoachingNotesPriming,
            category: Contextual,
            operation: MetadataAppending,
            conditions: [
                "High Positive Feedback",
                "Mixed Feedback",
                "Low Performance",
                "Focused Issue",
                "Neutral Note",
            ]
            .iter()
            .map(|l| Condition::new(l, meta(DimensionName::CoachingNotesPriming)))
            .collect(),
        },
        FairnessDimension {
            name: DimensionName::ContextualMetadata,
            category: Contextual,
            operation: MetadataAppending,
            conditions: ["Environmental Context", "System Metadata", "Queue Context"]
                .iter()
                .map(|l| Condition::new(l, meta(DimensionName::ContextualMetadata)))
                .collect(),
        },
        FairnessDimension {
            name: DimensionName::CommunicativeStyle,
            category: Behavioral,
            operation: TurnTransformation,
            conditions: vec![
                Condition::new("Neutral", style("completely_indirect")),
                Condition::new("Original", P::Original),
                Condition::new("Direct", style("overly_direct")),
            ],
        },
        FairnessDimension {
            name: DimensionName::Politeness,
            category: Behavioral,
            operation: TurnTransformation,
            conditions: vec![
                Condition::new("Neutral", style("impolite")),
                Condition::new("Original", P::Original),
                Condition::new("Polite", style("overly_polite")),
            ],
        },
        FairnessDimension {
            name: DimensionName::Formality,
            category: Behavioral,
            operation: TurnTransformation,
            conditions: vec![
                Condition::new("Neutral", style("informal")),
                Condition::new("Original", P::Original),
                Condition::new("Formal", style("overly_formal")),
            ],
        },
        FairnessDimension {
            name: DimensionName::EmotionalLabor,
            category: Behavioral,
            operation: TurnTransformation,
            conditions: vec![
                Condition::new("Neutral", style("completely_unemotional")),
                Condition::new("Original", P::Original),
                Condition::new("Empathetic", style("overly_emotional")),
            ],
        },
    ]
}

/// Look up one dimension by name.
pub fn dimension(name: DimensionName) -> FairnessDimension {
    dimensions()
        .into_iter()
        .find(|d| d.name == name)
        .expect("registry covers every DimensionName")
}

/// The registry as a JSON document, for audit trails. The registry itself
/// is code-defined; this export is how reviewers inspect it.
pub fn export_registry() -> String {
    serde_json::to_string_pretty(&dimensions()).expect("registry serializes")
}

/// A literal metadata header template tied to a condition label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataTemplate {
    pub label: String,
    pub entries: Vec<(String, String)>,
}

/// The attribute and cue pools the generation operations draw from. Shipped
/// as an editable data file; every condition payload must resolve against it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributePools {
    pub names_by_gender: BTreeMap<String, Vec<String>>,
    pub names_by_ethnicity: BTreeMap<String, Vec<String>>,
    pub names_by_religion: BTreeMap<String, Vec<String>>,
    pub cues_by_ethnicity: BTreeMap<String, Vec<String>>,
    pub cues_by_religion: BTreeMap<String, Vec<String>>,
    pub disability_cues: Vec<String>,
    pub metadata_templates: BTreeMap<String, Vec<MetadataTemplate>>,
}

/// A condition payload resolved against the pools.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedPayload {
    Name(String),
    NameAndCue { name: String, cue: String },
    Cue(String),
    Metadata(MetadataHeader),
    Style(String),
    Original,
}

#[derive(Debug, thiserror::Error)]
pub enum TaxonomyError {
    #[error("pool {pool}[{key}] is empty or missing")]
    EmptyPool { pool: &'static str, key: String },
    #[error("no metadata template for dimension {dimension} labelled {label:?}")]
    MissingTemplate {
        dimension: DimensionName,
        label: String,
    },
    #[error("failed to read pools file {path}: {message}")]
    PoolFile { path: String, message: String },
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
}

const DEFAULT_POOLS: &str = include_str!("../assets/pools.json");

impl AttributePools {
    /// The pools shipped with the toolkit.
    pub fn builtin() -> Self {
        serde_json::from_str(DEFAULT_POOLS).expect("bundled pools parse")
    }

    pub fn load(path: &Path) -> Result<Self, TaxonomyError> {
        let raw = std::fs::read_to_string(path).map_err(|e| TaxonomyError::PoolFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&raw).map_err(|e| TaxonomyError::PoolFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TaxonomyError> {
        let raw = serde_json::to_string_pretty(self).expect("pools serialize");
        std::fs::write(path, raw).map_err(|e| TaxonomyError::PoolFile {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    fn pick<'a>(
        list: Option<&'a [String]>,
        pool: &'static str,
        key: &str,
        seed: u64,
    ) -> Result<&'a str, TaxonomyError> {
        let list = list.filter(|l| !l.is_empty()).ok_or(TaxonomyError::EmptyPool {
            pool,
            key: key.to_string(),
        })?;
        // Documented sampling rule: index = seed mod pool size, with pool
        // order as listed in the file. Reruns with the same seed reproduce.
        Ok(&list[(seed % list.len() as u64) as usize])
    }

    fn template(
        &self,
        dimension: DimensionName,
        label: &str,
    ) -> Result<MetadataHeader, TaxonomyError> {
        self.metadata_templates
            .get(dimension.as_str())
            .and_then(|ts| ts.iter().find(|t| t.label == label))
            .map(|t| MetadataHeader::new(t.entries.clone()))
            .ok_or_else(|| TaxonomyError::MissingTemplate {
                dimension,
                label: label.to_string(),
            })
    }

    /// Validate the closure property: every payload of every registered
    /// condition resolves against these pools.
    pub fn validate(&self, registry: &[FairnessDimension]) -> Result<(), TaxonomyError> {
        for dim in registry {
            for condition in &dim.conditions {
                resolve_payload(condition, self, 0)?;
            }
        }
        Ok(())
    }
}

/// Resolve a condition payload to a concrete sampled value. Deterministic
/// given (condition, pools, seed).
pub fn resolve_payload(
    condition: &Condition,
    pools: &AttributePools,
    seed: u64,
) -> Result<ResolvedPayload, TaxonomyError> {
    use ConditionPayload as P;
    let payload = match &condition.payload {
        P::GenderName { gender } => ResolvedPayload::Name(
            AttributePools::pick(
                pools.names_by_gender.get(gender).map(|v| v.as_slice()),
                "names_by_gender",
                gender,
                seed,
            )?
            .to_string(),
        ),
        P::EthnicName { ethnicity } => ResolvedPayload::Name(
            AttributePools::pick(
                pools.names_by_ethnicity.get(ethnicity).map(|v| v.as_slice()),
                "names_by_ethnicity",
                ethnicity,
                seed,
            )?
            .to_string(),
        ),
        P::ReligiousName { religion } => ResolvedPayload::Name(
            AttributePools::pick(
                pools.names_by_religion.get(religion).map(|v| v.as_slice()),
                "names_by_religion",
                religion,
                seed,
            )?
            .to_string(),
        ),
        P::EthnicNameWithCues { ethnicity } => ResolvedPayload::NameAndCue {
            name: AttributePools::pick(
                pools.names_by_ethnicity.get(ethnicity).map(|v| v.as_slice()),
                "names_by_ethnicity",
                ethnicity,
                seed,
            )?
            .to_string(),
            cue: AttributePools::pick(
                pools.cues_by_ethnicity.get(ethnicity).map(|v| v.as_slice()),
                "cues_by_ethnicity",
                ethnicity,
                seed,
            )?
            .to_string(),
        },
        P::ReligiousNameWithCues { religion } => ResolvedPayload::NameAndCue {
            name: AttributePools::pick(
                pools.names_by_religion.get(religion).map(|v| v.as_slice()),
                "names_by_religion",
                religion,
                seed,
            )?
            .to_string(),
            cue: AttributePools::pick(
                pools.cues_by_religion.get(religion).map(|v| v.as_slice()),
                "cues_by_religion",
                religion,
                seed,
            )?
            .to_string(),
        },
        P::DisabilityCues => ResolvedPayload::Cue(
            AttributePools::pick(
                Some(pools.disability_cues.as_slice()),
                "disability_cues",
                "",
                seed,
            )?
            .to_string(),
        ),
        P::MetadataTemplate { dimension } => {
            ResolvedPayload::Metadata(pools.template(*dimension, &condition.label)?)
        }
        P::Style { category } => ResolvedPayload::Style(category.clone()),
        P::Original => ResolvedPayload::Original,
    };
    Ok(payload)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_fifteen_dimension_strategies() {
        let dims = dimensions();
        assert_eq!(dims.len(), 15);
        let count = |cat: Category| dims.iter().filter(|d| d.category == cat).count();
        assert_eq!(count(Category::Identity), 6);
        assert_eq!(count(Category::Contextual), 5);
        assert_eq!(count(Category::Behavioral), 4);
    }

    #[test]
    fn gender_conditions_are_male_female() {
        let d = dimension(DimensionName::AgentGender);
        let labels: Vec<&str> = d.conditions.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["Male", "Female"]);
        assert_eq!(pairs(&d).len(), 1);
    }

    #[test]
    fn religion_conditions_match_attribute_set() {
        let d = dimension(DimensionName::AgentReligionName);
        let labels: Vec<&str> = d.conditions.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(
            labels,
            vec!["Hinduism", "Christianity", "Islam", "Judaism", "Buddhism"]
        );
    }

    // Oracle for the pair-count law: exhaustive double loop with c < c'.
    fn brute_force_pairs(labels: &[&str]) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                out.push((a.to_string(), b.to_string()));
            }
        }
        out
    }

    #[test]
    fn pair_counts_match_brute_force_oracle() {
        for dim in dimensions() {
            let labels: Vec<&str> = dim.conditions.iter().map(|c| c.label.as_str()).collect();
            let oracle = brute_force_pairs(&labels);
            let got = pairs(&dim);
            assert_eq!(got.len(), oracle.len(), "dimension {}", dim.name);
            let n = labels.len();
            assert_eq!(got.len(), n * (n - 1) / 2, "dimension {}", dim.name);
        }
        assert_eq!(pairs(&dimension(DimensionName::AgentReligionName)).len(), 10);
        assert_eq!(pairs(&dimension(DimensionName::AgentEthnicityName)).len(), 15);
    }

    #[test]
    fn pairs_are_unordered() {
        assert_eq!(ConditionPair::new("a", "b"), ConditionPair::new("b", "a"));
    }

    #[test]
    fn every_dimension_maps_to_one_operation_and_two_plus_conditions() {
        for dim in dimensions() {
            assert!(dim.conditions.len() >= 2, "dimension {}", dim.name);
        }
    }

    #[test]
    fn seeded_resolution_is_deterministic_index_rule() {
        let mut pools = AttributePools::builtin();
        pools.names_by_gender.insert(
            "Female".to_string(),
            vec!["Priya".to_string(), "Monica".to_string()],
        );
        let condition = Condition::new(
            "Female",
            ConditionPayload::GenderName {
                gender: "Female".to_string(),
            },
        );
        let resolved = resolve_payload(&condition, &pools, 0).unwrap();
        assert_eq!(resolved, ResolvedPayload::Name("Priya".to_string()));
        let resolved = resolve_payload(&condition, &pools, 1).unwrap();
        assert_eq!(resolved, ResolvedPayload::Name("Monica".to_string()));
        // Same inputs twice -> identical outputs.
        assert_eq!(
            resolve_payload(&condition, &pools, 7).unwrap(),
            resolve_payload(&condition, &pools, 7).unwrap()
        );
    }

    #[test]
    fn metadata_templates_are_literal() {
        let pools = AttributePools::builtin();
        let d = dimension(DimensionName::AgentProfile);
        let trainee = d.condition("Trainee").unwrap();
        let resolved = resolve_payload(trainee, &pools, 3).unwrap();
        match resolved {
            ResolvedPayload::Metadata(header) => {
                assert_eq!(
                    header.entries,
                    vec![
                        ("Agent Role".to_string(), "Trainee".to_string()),
                        ("Agent Tenure".to_string(), "2 weeks".to_string()),
                    ]
                );
            }
            other => panic!("unexpected payload: {other:?}"),
        }
    }

    #[test]
    fn builtin_pools_close_over_registry() {
        let pools = AttributePools::builtin();
        pools.validate(&dimensions()).unwrap();
    }

    #[test]
    fn empty_pool_is_configuration_error() {
        let mut pools = AttributePools::builtin();
        pools.names_by_gender.insert("Female".to_string(), vec![]);
        let condition = Condition::new(
            "Female",
            ConditionPayload::GenderName {
                gender: "Female".to_string(),
            },
        );
        assert!(matches!(
            resolve_payload(&condition, &pools, 0),
            Err(TaxonomyError::EmptyPool { .. })
        ));
    }

    #[test]
    fn registry_export_roundtrips() {
        let exported = export_registry();
        let parsed: Vec<FairnessDimension> = serde_json::from_str(&exported).unwrap();
        assert_eq!(parsed, dimensions());
    }

    #[test]
    fn past_performance_improving_template_matches_trend_format() {
        let pools = AttributePools::builtin();
        let d = dimension(DimensionName::PastPerformance);
        let improving = d.condition("Improving Performance").unwrap();
        match resolve_payload(improving, &pools, 0).unwrap() {
            ResolvedPayload::Metadata(header) => {
                assert_eq!(header.entries[0].0, "Agent's past 10 QA reviews");
                assert!(header.entries[0].1.contains("65 → 80"));
            }
            other => panic!("unexpected payload: {other:?}"),
        }
    }
}
