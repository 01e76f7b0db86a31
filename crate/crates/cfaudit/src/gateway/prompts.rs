//! Prompt templates. Templates are plain text files with `{{name}}`
//! placeholders so auditors can inspect exactly what is sent; the bundled
//! set can be overridden from a directory.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::{QaQuestion, Transcript};

/// Template identifiers, one per prompt the toolkit sends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateId {
    QaEvaluation,
    CoachingPositives,
    CoachingImprovements,
    FairnessSystemQa,
    FairnessSystemCoaching,
    TurnIdentifier,
    TransformName,
    TransformGender,
    TransformStyle,
    InjectEthnicity,
    InjectReligion,
    InjectDisability,
    SemanticEquivalence,
}

impl TemplateId {
    pub const ALL: [TemplateId; 13] = [
        TemplateId::QaEvaluation,
        TemplateId::CoachingPositives,
        TemplateId::CoachingImprovements,
        TemplateId::FairnessSystemQa,
        TemplateId::FairnessSystemCoaching,
        TemplateId::TurnIdentifier,
        TemplateId::TransformName,
        TemplateId::TransformGender,
        TemplateId::TransformStyle,
        TemplateId::InjectEthnicity,
        TemplateId::InjectReligion,
        TemplateId::InjectDisability,
        TemplateId::SemanticEquivalence,
    ];

    pub fn file_name(&self) -> &'static str {
        match self {
            TemplateId::QaEvaluation => "qa_evaluation.txt",
            TemplateId::CoachingPositives => "coaching_positives.txt",
            TemplateId::CoachingImprovements => "coaching_improvements.txt",
            TemplateId::FairnessSystemQa => "fairness_system_qa.txt",
            TemplateId::FairnessSystemCoaching => "fairness_system_coaching.txt",
            TemplateId::TurnIdentifier => "turn_identifier.txt",
            TemplateId::TransformName => "transform_name.txt",
            TemplateId::TransformGender => "transform_gender.txt",
            TemplateId::TransformStyle => "transform_style.txt",
            TemplateId::InjectEthnicity => "inject_ethnicity.txt",
            TemplateId::InjectReligion => "inject_religion.txt",
            TemplateId::InjectDisability => "inject_disability.txt",
            TemplateId::SemanticEquivalence => "semantic_equivalence.txt",
        }
    }

    fn builtin(&self) -> &'static str {
        match self {
            TemplateId::QaEvaluation => include_str!("../../assets/prompts/qa_evaluation.txt"),
            TemplateId::CoachingPositives => {
                include_str!("../../assets/prompts/coaching_positives.txt")
            }
            TemplateId::CoachingImprovements => {
                include_str!("../../assets/prompts/coaching_improvements.txt")
            }
            TemplateId::FairnessSystemQa => {
                include_str!("../../assets/prompts/fairness_system_qa.txt")
            }
            TemplateId::FairnessSystemCoaching => {
                include_str!("../../assets/prompts/fairness_system_coaching.txt")
            }
            TemplateId::TurnIdentifier => include_str!("../../assets/prompts/turn_identifier.txt"),
            TemplateId::TransformName => include_str!("../../assets/prompts/transform_name.txt"),
            TemplateId::TransformGender => {
                include_str!("../../assets/prompts/transform_gender.txt")
            }
            TemplateId::TransformStyle => include_str!("../../assets/prompts/transform_style.txt"),
            TemplateId::InjectEthnicity => {
                include_str!("../../assets/prompts/inject_ethnicity.txt")
            }
            TemplateId::InjectReligion => include_str!("../../assets/prompts/inject_religion.txt"),
            TemplateId::InjectDisability => {
                include_str!("../../assets/prompts/inject_disability.txt")
            }
            TemplateId::SemanticEquivalence => {
                include_str!("../../assets/prompts/semantic_equivalence.txt")
            }
        }
    }
}

/// Loaded prompt templates.
#[derive(Debug, Clone)]
pub struct PromptSet {
    templates: BTreeMap<TemplateId, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptSet {
    pub fn builtin() -> Self {
        let templates = TemplateId::ALL
            .iter()
            .map(|id| (*id, id.builtin().to_string()))
            .collect();
        Self { templates }
    }

    /// Load templates from a directory, falling back to the bundled text for
    /// any file that is absent.
    pub fn from_dir(dir: &Path) -> std::io::Result<Self> {
        let mut set = Self::builtin();
        for id in TemplateId::ALL {
            let path = dir.join(id.file_name());
            if path.exists() {
                set.templates.insert(id, std::fs::read_to_string(&path)?);
            }
        }
        Ok(set)
    }

    /// Write the active templates out for audit.
    pub fn export(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (id, text) in &self.templates {
            std::fs::write(dir.join(id.file_name()), text)?;
        }
        Ok(())
    }

    pub fn render(&self, id: TemplateId, values: &[(&str, &str)]) -> String {
        let mut text = self.templates[&id].clone();
        for (key, value) in values {
            text = text.replace(&format!("{{{{{key}}}}}"), value);
        }
        text
    }
}

/// Render a transcript the way every evaluator prompt sees it: header
/// entries as `key: value` lines strictly before the numbered turns.
pub fn render_transcript(transcript: &Transcript) -> String {
    let mut lines = Vec::new();
    if let Some(header) = &transcript.header {
        for (key, value) in &header.entries {
            lines.push(format!("{key}: {value}"));
        }
    }
    for turn in &transcript.turns {
        lines.push(format!("{}: {}: {}", turn.index, turn.speaker, turn.text));
    }
    lines.join("\n")
}

pub fn render_sub_criteria(question: &QaQuestion) -> String {
    if question.sub_criteria.is_empty() {
        "- (none provided)".to_string()
    } else {
        question
            .sub_criteria
            .iter()
            .map(|c| format!("- {c}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{MetadataHeader, Speaker, Turn};

    #[test]
    fn placeholders_are_substituted() {
        let set = PromptSet::builtin();
        let rendered = set.render(
            TemplateId::TransformName,
            &[
                ("target_name", "dmitri volkov"),
                ("turn", "hello this is monica"),
                ("left", "(start of call)"),
                ("right", "customer: hi"),
            ],
        );
        assert!(rendered.contains("target_name: dmitri volkov"));
        assert!(rendered.contains("name_turn: hello this is monica"));
        assert!(!rendered.contains("{{"));
    }

    #[test]
    fn transcript_render_emits_header_before_turns() {
        let mut t = Transcript::new(
            "t1",
            vec![
                Turn::new(1, Speaker::Agent, "hello"),
                Turn::new(2, Speaker::Customer, "hi"),
            ],
        );
        t.header = Some(MetadataHeader::new(vec![(
            "Agent Role".to_string(),
            "Trainee".to_string(),
        )]));
        let rendered = render_transcript(&t);
        assert_eq!(rendered, "Agent Role: Trainee\n1: agent: hello\n2: customer: hi");
    }

    #[test]
    fn templates_export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let set = PromptSet::builtin();
        set.export(dir.path()).unwrap();
        let loaded = PromptSet::from_dir(dir.path()).unwrap();
        for id in TemplateId::ALL {
            assert_eq!(loaded.templates[&id], set.templates[&id]);
        }
    }
}
