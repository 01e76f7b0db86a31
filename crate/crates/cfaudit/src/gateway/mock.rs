//! Deterministic mock providers. One `MockEvaluator` answers every prompt
//! kind the toolkit sends (turn identification, transformations, cue
//! injection, the semantic gate, Auto-QA and coaching), so full audits run
//! offline and reproducibly. Judgment behavior is pluggable:
//!
//! - `ByInstance`: outputs keyed by (source transcript, question) only,
//!   invariant to condition — the zero-bias null evaluator.
//! - `ByPrompt`: outputs keyed by the full prompt — condition-sensitive but
//!   repeat-stable, the "deterministic but biased" profile.
//! - `Stochastic`: seeded judgment flips with probability `p` and uniform
//!   score jitter — the noise source for robustness baselines.
//! - `Fixed`: constant outputs.

use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::provider::{Provider, ProviderError};
use super::GenerationParams;
use crate::corpus::{Answer, Speaker};

/// Stable 64-bit FNV-1a; identical on every platform.
pub fn fnv1a(data: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in data.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Bit finalizer (splitmix64-style). Raw FNV low bits are a weak parity
/// function of the input, so anything deriving small values from a hash
/// must mix first.
pub fn mix(mut hash: u64) -> u64 {
    hash ^= hash >> 33;
    hash = hash.wrapping_mul(0xff51afd7ed558ccd);
    hash ^= hash >> 33;
    hash = hash.wrapping_mul(0xc4ceb9fe1a85ec53);
    hash ^= hash >> 33;
    hash
}

/// Maps rendered transcript text to a stable instance key (the source id).
/// Variants of the same source all resolve to the same key, which is what
/// makes the null evaluator condition-invariant.
#[derive(Debug, Default, Clone)]
pub struct InstanceIndex {
    exact: std::collections::HashMap<String, String>,
    needles: Vec<(String, String)>,
}

impl InstanceIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register one rendered transcript under a key. Longer needles are
    /// checked first so supersets win over embedded texts.
    pub fn insert(&mut self, rendered_transcript: impl Into<String>, key: impl Into<String>) {
        let needle = rendered_transcript.into();
        let key = key.into();
        self.exact.insert(needle.clone(), key.clone());
        self.needles.push((needle, key));
        self.needles.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
    }

    pub fn resolve(&self, prompt: &str) -> Option<&str> {
        // Fast path: toolkit prompts end with the rendered transcript, so an
        // exact lookup on the trailing block almost always hits.
        if let Some(pos) = prompt.rfind("Transcript:\n") {
            let block = prompt[pos + "Transcript:\n".len()..].trim_end();
            if let Some(key) = self.exact.get(block) {
                return Some(key.as_str());
            }
        }
        self.needles
            .iter()
            .find(|(needle, _)| prompt.contains(needle.as_str()))
            .map(|(_, key)| key.as_str())
    }
}

/// How the mock derives judgments and scores.
#[allow(clippy::large_enum_variant)]
pub enum JudgmentPolicy {
    ByInstance(Arc<InstanceIndex>),
    ByPrompt,
    Stochastic {
        flip_probability: f64,
        score_jitter: f64,
        rng: Mutex<ChaCha8Rng>,
    },
    Fixed {
        judgment: Answer,
        confidence: u8,
        score: u8,
    },
}

impl JudgmentPolicy {
    pub fn stochastic(flip_probability: f64, score_jitter: f64, seed: u64) -> Self {
        JudgmentPolicy::Stochastic {
            flip_probability,
            score_jitter,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

/// What kind of prompt arrived, detected from template markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TaskKind {
    Annotation,
    Validate,
    InjectDisability,
    InjectReligion,
    InjectEthnicity,
    TransformGender,
    TransformName,
    TransformStyle,
    Qa,
    CoachingPositives,
    CoachingImprovements,
}

fn classify(prompt: &str) -> Option<TaskKind> {
    if prompt.contains("\"agent_name\"") {
        return Some(TaskKind::Annotation);
    }
    if prompt.contains("Reply with exactly one word: EQUIVALENT or DIFFERENT") {
        return Some(TaskKind::Validate);
    }
    if prompt.contains("\ndisability_cues: ") {
        return Some(TaskKind::InjectDisability);
    }
    if prompt.contains("\ntarget_religion: ") {
        return Some(TaskKind::InjectReligion);
    }
    if prompt.contains("\ntarget_race: ") {
        return Some(TaskKind::InjectEthnicity);
    }
    if prompt.contains("\ntarget_gender: ") {
        return Some(TaskKind::TransformGender);
    }
    if prompt.contains("\ntarget_name: ") {
        return Some(TaskKind::TransformName);
    }
    if prompt.contains("\ncategory: ") && prompt.contains("\"trans_turn\"") {
        return Some(TaskKind::TransformStyle);
    }
    if prompt.contains("Hence, the final answer is:") {
        return Some(TaskKind::Qa);
    }
    if prompt.contains("<integer between 0 and 100>") {
        if prompt.contains("Strength 1") {
            return Some(TaskKind::CoachingPositives);
        }
        return Some(TaskKind::CoachingImprovements);
    }
    None
}

/// Value of the last `prefix`-led line in the prompt (the Input block sits
/// at the end of every template).
fn last_field<'a>(prompt: &'a str, field: &str) -> Option<&'a str> {
    let marker = format!("\n{field}: ");
    let pos = prompt.rfind(&marker)?;
    let rest = &prompt[pos + marker.len()..];
    Some(rest.lines().next().unwrap_or("").trim())
}

fn transcript_block(prompt: &str) -> Vec<(u32, Speaker, String)> {
    let Some(pos) = prompt.rfind("Transcript:\n") else {
        return Vec::new();
    };
    let mut turns = Vec::new();
    for line in prompt[pos + "Transcript:\n".len()..].lines() {
        let mut parts = line.splitn(3, ": ");
        let (Some(idx), Some(speaker), Some(text)) = (parts.next(), parts.next(), parts.next())
        else {
            continue;
        };
        let Ok(idx) = idx.trim().parse::<u32>() else {
            continue;
        };
        let speaker = match speaker.trim() {
            "agent" => Speaker::Agent,
            "customer" => Speaker::Customer,
            _ => continue,
        };
        turns.push((idx, speaker, text.to_string()));
    }
    turns
}

fn detect_agent_name(turns: &[(u32, Speaker, String)]) -> String {
    for (_, speaker, text) in turns {
        if *speaker != Speaker::Agent {
            continue;
        }
        if let Some(pos) = text.find("this is ") {
            let tail = &text[pos + "this is ".len()..];
            let end = tail.find(" from ").unwrap_or_else(|| {
                // Fall back to at most two words.
                let mut count = 0;
                tail.char_indices()
                    .find(|(_, c)| {
                        if *c == ' ' {
                            count += 1;
                        }
                        count == 2
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(tail.len())
            });
            return tail[..end].trim().to_string();
        }
    }
    String::new()
}

const FEMALE_TOKENS: [&str; 4] = ["maam", "ma'am", "mrs", "she"];
const MALE_TOKENS: [&str; 3] = ["sir", "mr", "he"];

fn contains_word(text: &str, word: &str) -> bool {
    text.split(|c: char| !c.is_ascii_alphanumeric() && c != '\'')
        .any(|w| w.eq_ignore_ascii_case(word))
}

fn any_word<'a>(text: &str, words: &[&'a str]) -> Option<&'a str> {
    words.iter().copied().find(|w| contains_word(text, w))
}

fn lexical_annotation(turns: &[(u32, Speaker, String)]) -> serde_json::Value {
    let agent_name = detect_agent_name(turns);
    let mut name_turns = Vec::new();
    let mut gender_turns = Vec::new();
    let mut pronouns: Vec<String> = Vec::new();
    let mut politeness = Vec::new();
    let mut formality = Vec::new();
    let mut directness = Vec::new();
    let mut emotional = Vec::new();
    let mut disfluency = Vec::new();

    for (idx, speaker, text) in turns {
        if !agent_name.is_empty() && text.contains(agent_name.as_str()) {
            name_turns.push(*idx);
        } else if let Some(tok) = any_word(text, &FEMALE_TOKENS).or_else(|| any_word(text, &MALE_TOKENS)) {
            gender_turns.push(*idx);
            pronouns.push(tok.to_string());
        }
        if *speaker == Speaker::Agent {
            if text.contains("please") || text.contains("thank you") || text.contains("kindly") {
                politeness.push(*idx);
            }
            if text.contains("i apologize") || text.contains("greetings") || text.contains("i would be")
            {
                formality.push(*idx);
            }
            if text.contains("you must")
                || text.contains("you need to")
                || text.contains("would it be possible")
            {
                directness.push(*idx);
            }
            if text.contains("sorry") || text.contains("i understand") || text.contains("glad to help")
            {
                emotional.push(*idx);
            }
        }
        if contains_word(text, "um") || contains_word(text, "uh") {
            disfluency.push(*idx);
        }
    }

    json!({
        "agent_name": agent_name,
        "agent_gender": "",
        "agent_race": "",
        "agent_religion": "",
        "name_turns": name_turns,
        "agent_pronouns": pronouns,
        "gender_turns": gender_turns,
        "race_turns": [],
        "religion_turns": [],
        "politeness_turns": politeness,
        "formality_turns": formality,
        "directness_turns": directness,
        "emotional_labor_turns": emotional,
        "disfluency_turns": disfluency,
        "disability_turns": []
    })
}

fn swap_name(turn: &str, target: &str) -> String {
    if let Some(pos) = turn.find("this is ") {
        let head = &turn[..pos + "this is ".len()];
        let tail = &turn[pos + "this is ".len()..];
        if let Some(from_pos) = tail.find(" from ") {
            return format!("{head}{target}{}", &tail[from_pos..]);
        }
        return format!("{head}{target}");
    }
    format!("this is {target} speaking. {turn}")
}

fn swap_gender(turn: &str, target_male: bool) -> String {
    let mapping: &[(&str, &str)] = if target_male {
        &[
            ("ma'am", "sir"),
            ("maam", "sir"),
            ("mrs", "mr"),
            ("she", "he"),
            ("hers", "his"),
            ("her", "his"),
            ("herself", "himself"),
        ]
    } else {
        &[
            ("sir", "ma'am"),
            ("mr", "mrs"),
            ("he", "she"),
            ("him", "her"),
            ("his", "her"),
            ("himself", "herself"),
        ]
    };
    let mut out = String::with_capacity(turn.len());
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String| {
        if word.is_empty() {
            return;
        }
        let lowered = word.to_ascii_lowercase();
        let replaced = mapping
            .iter()
            .find(|(from, _)| *from == lowered)
            .map(|(_, to)| (*to).to_string())
            .unwrap_or_else(|| word.clone());
        out.push_str(&replaced);
        word.clear();
    };
    for c in turn.chars() {
        if c.is_ascii_alphanumeric() || c == '\'' {
            word.push(c);
        } else {
            flush(&mut word, &mut out);
            out.push(c);
        }
    }
    flush(&mut word, &mut out);
    out
}

fn apply_style(turn: &str, category: &str) -> String {
    match category {
        "overly_polite" => format!("{turn} thank you so much for your patience, i truly appreciate it."),
        "impolite" => {
            let stripped = turn
                .replace("please ", "")
                .replace(" please", "")
                .replace("thank you so much", "")
                .replace("thank you", "")
                .replace("kindly ", "");
            let stripped = stripped.trim().to_string();
            if stripped == turn || stripped.is_empty() {
                format!("look, {turn}")
            } else {
                stripped
            }
        }
        "overly_formal" => format!("i would be most obliged to assist. {turn}"),
        "informal" => format!("hey, {turn}"),
        "overly_direct" => format!("let's be direct. {turn}"),
        "completely_indirect" => format!("if it's alright with you, {turn}"),
        "overly_emotional" => format!("i'm so sorry for all the trouble this caused. {turn}"),
        "completely_unemotional" => format!("noted. {turn}"),
        other => format!("[{other}] {turn}"),
    }
}

fn trans_turn_reply(text: String) -> String {
    json!({ "trans_turn": text }).to_string()
}

/// A provider that answers every toolkit prompt deterministically.
pub struct MockEvaluator {
    policy: JudgmentPolicy,
}

impl MockEvaluator {
    pub fn new(policy: JudgmentPolicy) -> Self {
        Self { policy }
    }

    /// Null evaluator: judgments and scores depend only on the instance key
    /// resolved through `index` plus the question line.
    pub fn by_instance(index: Arc<InstanceIndex>) -> Self {
        Self::new(JudgmentPolicy::ByInstance(index))
    }

    /// Condition-sensitive, repeat-stable evaluator.
    pub fn by_prompt() -> Self {
        Self::new(JudgmentPolicy::ByPrompt)
    }

    fn instance_hash(&self, prompt: &str, salt: u64) -> u64 {
        match &self.policy {
            JudgmentPolicy::ByInstance(index) => {
                let base = index
                    .resolve(prompt)
                    .map(fnv1a)
                    .unwrap_or_else(|| fnv1a(prompt));
                let question = last_field(prompt, "Question").map(fnv1a).unwrap_or(0);
                mix(base ^ question.rotate_left(17) ^ salt.wrapping_mul(0x9e3779b97f4a7c15))
            }
            _ => mix(fnv1a(prompt) ^ salt.wrapping_mul(0x9e3779b97f4a7c15)),
        }
    }

    fn qa_reply(&self, prompt: &str) -> String {
        let (judgment, confidence) = match &self.policy {
            JudgmentPolicy::Fixed {
                judgment,
                confidence,
                ..
            } => (*judgment, *confidence),
            JudgmentPolicy::Stochastic {
                flip_probability,
                score_jitter,
                rng,
            } => {
                let mut rng = rng.lock().expect("mock rng");
                let judgment = if rng.gen_bool(*flip_probability) {
                    Answer::No
                } else {
                    Answer::Yes
                };
                let jitter = if *score_jitter > 0.0 {
                    rng.gen_range(-*score_jitter..=*score_jitter)
                } else {
                    0.0
                };
                (judgment, (75.0 + jitter).clamp(0.0, 100.0).round() as u8)
            }
            _ => {
                let hash = self.instance_hash(prompt, 0);
                let judgment = if hash.is_multiple_of(2) { Answer::Yes } else { Answer::No };
                let confidence = 55 + ((hash >> 8) % 46) as u8;
                (judgment, confidence)
            }
        };
        let answer = match judgment {
            Answer::Yes => "Yes",
            Answer::No => "No",
        };
        format!(
            "To answer the given question, let's think step by step:\n\n\
Evidences:\n- deterministic mock evidence\n\n\
Synthesis:\nmock synthesis of the cited evidence.\n\n\
Confidence: {confidence}\n\nHence, the final answer is: {answer}"
        )
    }

    fn coaching_reply(&self, prompt: &str, positives: bool) -> String {
        let salt = if positives { 1 } else { 2 };
        let score = match &self.policy {
            JudgmentPolicy::Fixed { score, .. } => *score,
            JudgmentPolicy::Stochastic { score_jitter, rng, .. } => {
                let mut rng = rng.lock().expect("mock rng");
                let jitter = if *score_jitter > 0.0 {
                    rng.gen_range(-*score_jitter..=*score_jitter)
                } else {
                    0.0
                };
                (70.0 + jitter).clamp(0.0, 100.0).round() as u8
            }
            _ => {
                let hash = self.instance_hash(prompt, salt);
                (20 + ((hash >> 16) % 81)) as u8
            }
        };
        let analysis = if positives {
            "- Strength 1: steady, clear communication\n- Strength 2: confirmed account details before acting"
        } else {
            "- Area 1: provide clearer next-step expectations\n- Area 2: reduce scripted phrasing"
        };
        json!({ "analysis": analysis, "score": score }).to_string()
    }
}

impl Provider for MockEvaluator {
    fn complete(
        &self,
        prompt: &str,
        _model_id: &str,
        _params: &GenerationParams,
    ) -> Result<String, ProviderError> {
        let Some(kind) = classify(prompt) else {
            return Err(ProviderError::Fatal(
                "mock evaluator could not classify the prompt".into(),
            ));
        };
        let reply = match kind {
            TaskKind::Annotation => lexical_annotation(&transcript_block(prompt)).to_string(),
            TaskKind::Validate => "EQUIVALENT".to_string(),
            TaskKind::TransformName => {
                let target = last_field(prompt, "target_name").unwrap_or("alex");
                let turn = last_field(prompt, "name_turn").unwrap_or("");
                trans_turn_reply(swap_name(turn, target))
            }
            TaskKind::TransformGender => {
                let target = last_field(prompt, "target_gender").unwrap_or("male");
                let turn = last_field(prompt, "gender_turn").unwrap_or("");
                trans_turn_reply(swap_gender(turn, target.eq_ignore_ascii_case("male")))
            }
            TaskKind::TransformStyle => {
                let category = last_field(prompt, "category").unwrap_or("overly_polite");
                let turn = last_field(prompt, "style_turn").unwrap_or("");
                trans_turn_reply(apply_style(turn, category))
            }
            TaskKind::InjectEthnicity => {
                let turn = last_field(prompt, "race_turn").unwrap_or("");
                let cue = last_field(prompt, "race_cues").unwrap_or("");
                trans_turn_reply(format!("{turn} {cue}").trim().to_string())
            }
            TaskKind::InjectReligion => {
                let turn = last_field(prompt, "religion_turn").unwrap_or("");
                let cue = last_field(prompt, "religion_cues").unwrap_or("");
                trans_turn_reply(format!("{turn} {cue}").trim().to_string())
            }
            TaskKind::InjectDisability => {
                let cue = last_field(prompt, "disability_cues")
                    .unwrap_or("i use a screen reader, one moment please.");
                json!({
                    "trans_turn": [
                        format!("agent: just a heads up, {}", cue.to_ascii_lowercase()),
                        "customer: no worries at all, take your time."
                    ]
                })
                .to_string()
            }
            TaskKind::Qa => self.qa_reply(prompt),
            TaskKind::CoachingPositives => self.coaching_reply(prompt, true),
            TaskKind::CoachingImprovements => self.coaching_reply(prompt, false),
        };
        Ok(reply)
    }
}
