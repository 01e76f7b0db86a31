//! Reply parsing: sentinel-based extraction for Auto-QA replies, repaired
//! JSON for coaching replies, and a single-token verdict for the semantic
//! gate. Parsing is fail-closed: anything that does not normalize cleanly
//! becomes a typed error carrying the raw text, never a silent default.

use serde::Deserialize;

use crate::corpus::Answer;

/// The sentence every Auto-QA reply must end with.
pub const FINAL_ANSWER_SENTINEL: &str = "hence, the final answer is:";
const CONFIDENCE_MARKER: &str = "confidence:";

/// Why a reply failed to parse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingSentinel,
    MissingJudgment,
    MissingConfidence,
    ConfidenceOutOfRange(i64),
    MalformedJson(String),
    MissingField(&'static str),
    ScoreOutOfRange(i64),
    UnknownVerdict,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::MissingSentinel => {
                write!(f, "reply lacks the final-answer sentinel {FINAL_ANSWER_SENTINEL:?}")
            }
            ParseErrorKind::MissingJudgment => {
                write!(f, "no yes/no token found after the final-answer sentinel")
            }
            ParseErrorKind::MissingConfidence => write!(f, "no integer found after {CONFIDENCE_MARKER:?}"),
            ParseErrorKind::ConfidenceOutOfRange(v) => {
                write!(f, "confidence {v} outside 0-100")
            }
            ParseErrorKind::MalformedJson(e) => write!(f, "malformed JSON after repair pass: {e}"),
            ParseErrorKind::MissingField(field) => write!(f, "missing field {field:?}"),
            ParseErrorKind::ScoreOutOfRange(v) => write!(f, "score {v} outside 0-100"),
            ParseErrorKind::UnknownVerdict => write!(f, "reply does not normalize to a verdict token"),
        }
    }
}

/// A parse failure with the offending raw reply retained for audit.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{kind}")]
pub struct ParseFailure {
    pub kind: ParseErrorKind,
    pub raw: String,
}

impl ParseFailure {
    fn new(kind: ParseErrorKind, raw: &str) -> Self {
        Self {
            kind,
            raw: raw.to_string(),
        }
    }
}

/// Parsed Auto-QA reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedQaReply {
    pub judgment: Answer,
    pub confidence: u8,
    pub rationale: String,
}

fn first_integer_after(haystack: &str, from: usize) -> Option<i64> {
    let tail = &haystack[from..];
    let start = tail.find(|c: char| c.is_ascii_digit() || c == '-')?;
    let digits: String = tail[start..]
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '-')
        .collect();
    digits.parse().ok()
}

/// Extract judgment, confidence and rationale from a sentinel-format reply.
pub fn parse_qa_reply(raw: &str) -> Result<ParsedQaReply, ParseFailure> {
    let lowered = raw.to_ascii_lowercase();
    let sentinel_pos = lowered
        .find(FINAL_ANSWER_SENTINEL)
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingSentinel, raw))?;
    let after = &lowered[sentinel_pos + FINAL_ANSWER_SENTINEL.len()..];

    // Single normalization pass: split on whitespace, strip punctuation,
    // take the first token that folds to yes/no.
    let judgment = after
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_ascii_alphanumeric()))
        .find_map(Answer::parse)
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingJudgment, raw))?;

    let conf_pos = lowered
        .find(CONFIDENCE_MARKER)
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingConfidence, raw))?;
    let confidence = first_integer_after(&lowered, conf_pos + CONFIDENCE_MARKER.len())
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingConfidence, raw))?;
    if !(0..=100).contains(&confidence) {
        return Err(ParseFailure::new(
            ParseErrorKind::ConfidenceOutOfRange(confidence),
            raw,
        ));
    }

    let rationale = lowered
        .find("synthesis:")
        .map(|start| {
            let body = &raw[start + "synthesis:".len()..];
            let end = body
                .to_ascii_lowercase()
                .find(CONFIDENCE_MARKER)
                .unwrap_or(body.len());
            body[..end].trim().to_string()
        })
        .unwrap_or_default();

    Ok(ParsedQaReply {
        judgment,
        confidence: confidence as u8,
        rationale,
    })
}

/// Strip code fences and anything outside the outermost braces/brackets.
/// The one repair pass applied before structured parsing.
pub fn extract_json_block(raw: &str) -> &str {
    let trimmed = raw.trim();
    let body = trimmed
        .strip_prefix("```json")
        .or_else(|| trimmed.strip_prefix("```"))
        .map(|s| s.strip_suffix("```").unwrap_or(s))
        .unwrap_or(trimmed);
    let open = body.find(['{', '[']);
    match open {
        Some(start) => {
            let close = if body.as_bytes()[start] == b'{' {
                body.rfind('}')
            } else {
                body.rfind(']')
            };
            match close {
                Some(end) if end >= start => &body[start..=end],
                _ => body,
            }
        }
        None => body,
    }
}

#[derive(Deserialize)]
struct CoachingReply {
    analysis: Option<String>,
    score: Option<i64>,
}

/// Parsed coaching reply: the structured `{"analysis", "score"}` object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCoachingReply {
    pub analysis: String,
    pub score: u8,
}

pub fn parse_coaching_reply(raw: &str) -> Result<ParsedCoachingReply, ParseFailure> {
    let block = extract_json_block(raw);
    let reply: CoachingReply = serde_json::from_str(block)
        .map_err(|e| ParseFailure::new(ParseErrorKind::MalformedJson(e.to_string()), raw))?;
    let analysis = reply
        .analysis
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingField("analysis"), raw))?;
    let score = reply
        .score
        .ok_or_else(|| ParseFailure::new(ParseErrorKind::MissingField("score"), raw))?;
    if !(0..=100).contains(&score) {
        return Err(ParseFailure::new(ParseErrorKind::ScoreOutOfRange(score), raw));
    }
    Ok(ParsedCoachingReply {
        analysis,
        score: score as u8,
    })
}

/// Semantic-equivalence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent,
}

/// Normalize a validator reply to a verdict. Only an unambiguous
/// EQUIVALENT/DIFFERENT token is accepted; everything else errors so the
/// caller can apply the conservative (rejecting) default.
pub fn parse_verdict(raw: &str) -> Result<Verdict, ParseFailure> {
    let normalized = raw
        .trim()
        .trim_matches(|c: char| !c.is_ascii_alphanumeric())
        .to_ascii_lowercase();
    match normalized.as_str() {
        "equivalent" => Ok(Verdict::Equivalent),
        "different" => Ok(Verdict::NotEquivalent),
        _ => Err(ParseFailure::new(ParseErrorKind::UnknownVerdict, raw)),
    }
}
