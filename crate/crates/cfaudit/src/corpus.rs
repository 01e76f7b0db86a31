//! Transcript and gold-label ingestion: the canonical on-disk formats.
//!
//! A corpus file holds one transcript per line as a JSON object with the
//! fields `id`, `domain_tag`, `header` (ordered key/value pairs) and `turns`.
//! Transcripts that violate structural invariants are rejected at load time
//! rather than repaired, so everything downstream can assume clean inputs.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Who spoke a turn. Contact-center transcripts carry exactly these two roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Agent,
    Customer,
}

impl fmt::Display for Speaker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Speaker::Agent => write!(f, "agent"),
            Speaker::Customer => write!(f, "customer"),
        }
    }
}

/// A single conversational turn. `index` is 1-based and contiguous within a
/// transcript; `text` holds no line separators (one turn per record).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: u32,
    pub speaker: Speaker,
    pub text: String,
}

impl Turn {
    pub fn new(index: u32, speaker: Speaker, text: impl Into<String>) -> Self {
        Self {
            index,
            speaker,
            text: text.into(),
        }
    }
}

/// Ordered metadata entries prepended to a transcript, e.g. agent role or
/// past-performance summaries. Keys are unique; serialization always emits
/// the header before turn 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetadataHeader {
    pub entries: Vec<(String, String)>,
}

impl MetadataHeader {
    pub fn new(entries: Vec<(String, String)>) -> Self {
        Self { entries }
    }

    pub fn duplicate_key(&self) -> Option<&str> {
        let mut seen = HashMap::new();
        self.entries
            .iter()
            .map(|(key, _)| key.as_str())
            .find(|key| seen.insert(*key, ()).is_some())
    }
}

/// A speaker-tagged conversation plus optional prepended metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub header: Option<MetadataHeader>,
    pub turns: Vec<Turn>,
}

impl Transcript {
    pub fn new(id: impl Into<String>, turns: Vec<Turn>) -> Self {
        Self {
            id: id.into(),
            domain_tag: None,
            header: None,
            turns,
        }
    }

    /// Check every per-transcript invariant. Loaders call this so the rest of
    /// the toolkit never sees a malformed transcript.
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        if self.id.is_empty() {
            return Err(InvariantViolation::EmptyId);
        }
        for (pos, turn) in self.turns.iter().enumerate() {
            let expected = pos as u32 + 1;
            if turn.index != expected {
                return Err(InvariantViolation::NonContiguousIndex {
                    expected,
                    found: turn.index,
                });
            }
            if turn.text.is_empty() {
                return Err(InvariantViolation::EmptyTurnText { index: turn.index });
            }
            if turn.text.contains('\n') || turn.text.contains('\r') {
                return Err(InvariantViolation::TurnTextLineBreak { index: turn.index });
            }
        }
        let has_agent = self.turns.iter().any(|t| t.speaker == Speaker::Agent);
        let has_customer = self.turns.iter().any(|t| t.speaker == Speaker::Customer);
        if !has_agent || !has_customer {
            return Err(InvariantViolation::MissingSpeaker);
        }
        if let Some(header) = &self.header {
            if let Some(key) = header.duplicate_key() {
                return Err(InvariantViolation::DuplicateHeaderKey {
                    key: key.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn agent_turn_indices(&self) -> Vec<u32> {
        self.turns
            .iter()
            .filter(|t| t.speaker == Speaker::Agent)
            .map(|t| t.index)
            .collect()
    }

    pub fn turn(&self, index: u32) -> Option<&Turn> {
        // Contiguity from index 1 makes this a direct offset.
        self.turns.get(index.checked_sub(1)? as usize)
    }
}

/// Structural rule broken by a transcript.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantViolation {
    #[error("transcript id is empty")]
    EmptyId,
    #[error("non-contiguous turn index: expected {expected}, found {found}")]
    NonContiguousIndex { expected: u32, found: u32 },
    #[error("turn {index} has empty text")]
    EmptyTurnText { index: u32 },
    #[error("turn {index} text contains a line separator")]
    TurnTextLineBreak { index: u32 },
    #[error("transcript needs at least one agent and one customer turn")]
    MissingSpeaker,
    #[error("duplicate header key {key:?}")]
    DuplicateHeaderKey { key: String },
}

/// Binary gold answer for a QA question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    /// Case-folding rule for gold files and model replies: any casing of
    /// yes/no is accepted, everything else is rejected.
    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "yes" => Some(Answer::Yes),
            "no" => Some(Answer::No),
            _ => None,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes => write!(f, "yes"),
            Answer::No => write!(f, "no"),
        }
    }
}

/// Human-annotated answer for one (transcript, question) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub transcript_id: String,
    pub question_id: String,
    pub answer: Answer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    Subjective,
    Objective,
}

/// One rubric question an evaluator answers about a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaQuestion {
    pub question_id: String,
    pub category: String,
    pub text: String,
    #[serde(default)]
    pub variants: Vec<String>,
    #[serde(default)]
    pub sub_criteria: Vec<String>,
    pub kind: QuestionKind,
}

/// Errors raised while loading or saving corpus files.
#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invariant violated at line {line}: {violation}")]
    Invariant {
        line: usize,
        violation: InvariantViolation,
    },
    #[error("duplicate transcript id {id:?} at lines {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },
    #[error("duplicate gold label for ({transcript_id}, {question_id})")]
    DuplicateGoldLabel {
        transcript_id: String,
        question_id: String,
    },
    #[error("invalid gold answer {raw:?} at line {line} (expected yes or no)")]
    InvalidGoldAnswer { raw: String, line: usize },
    #[error("duplicate question id {id:?}")]
    DuplicateQuestionId { id: String },
    #[error("question at line {line} has empty text")]
    EmptyQuestionText { line: usize },
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Load a line-delimited corpus. An empty file yields an empty corpus;
/// any malformed line or invariant violation rejects the whole load.
pub fn load_corpus(path: &Path) -> Result<Vec<Transcript>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut transcripts = Vec::new();
    let mut seen_ids: HashMap<String, usize> = HashMap::new();
    for (pos, line) in reader.lines().enumerate() {
        let line_no = pos + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let transcript: Transcript =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        transcript
            .validate()
            .map_err(|violation| CorpusError::Invariant {
                line: line_no,
                violation,
            })?;
        if let Some(first) = seen_ids.insert(transcript.id.clone(), line_no) {
            return Err(CorpusError::DuplicateId {
                id: transcript.id,
                first,
                second: line_no,
            });
        }
        transcripts.push(transcript);
    }
    Ok(transcripts)
}

/// Serialize transcripts one per line. Struct field order keeps the header
/// block strictly before the turns, and `load_corpus(save_corpus(x))`
/// reproduces `x` structurally.
pub fn save_corpus(transcripts: &[Transcript], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for transcript in transcripts {
        let line = serde_json::to_string(transcript).expect("transcript serializes");
        writeln!(writer, "{line}").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

/// Gold-label key: (transcript_id, question_id).
pub type GoldKey = (String, String);

/// Load a gold-label CSV (`transcript_id,question_id,answer` with a header
/// row). Answers are case-folded; duplicates and unknown answers reject.
pub fn load_gold_labels(
    path: &Path,
) -> Result<std::collections::BTreeMap<GoldKey, GoldLabel>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let mut labels = std::collections::BTreeMap::new();
    for (pos, row) in reader.records().enumerate() {
        let line = pos + 2; // 1-based, after the header row
        let row = row.map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        if row.len() < 3 {
            return Err(CorpusError::Parse {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let answer = Answer::parse(&row[2]).ok_or_else(|| CorpusError::InvalidGoldAnswer {
            raw: row[2].to_string(),
            line,
        })?;
        let label = GoldLabel {
            transcript_id: row[0].to_string(),
            question_id: row[1].to_string(),
            answer,
        };
        let key = (label.transcript_id.clone(), label.question_id.clone());
        if labels.insert(key, label).is_some() {
            return Err(CorpusError::DuplicateGoldLabel {
                transcript_id: row[0].to_string(),
                question_id: row[1].to_string(),
            });
        }
    }
    Ok(labels)
}

/// Save gold labels with the canonical header row.
pub fn save_gold_labels(labels: &[GoldLabel], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(["transcript_id", "question_id", "answer"])
        .map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
    for label in labels {
        writer
            .write_record([
                label.transcript_id.as_str(),
                label.question_id.as_str(),
                &label.answer.to_string(),
            ])
            .map_err(|e| CorpusError::Parse {
                line: 0,
                message: e.to_string(),
            })?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

/// Load a question bank: one `QaQuestion` JSON object per line.
pub fn load_question_bank(path: &Path) -> Result<Vec<QaQuestion>, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut questions: Vec<QaQuestion> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (pos, line) in reader.lines().enumerate() {
        let line_no = pos + 1;
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let question: QaQuestion =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        if question.text.is_empty() {
            return Err(CorpusError::EmptyQuestionText { line: line_no });
        }
        if !seen.insert(question.question_id.clone()) {
            return Err(CorpusError::DuplicateQuestionId {
                id: question.question_id,
            });
        }
        questions.push(question);
    }
    Ok(questions)
}

/// Save a question bank, one object per line.
pub fn save_question_bank(questions: &[QaQuestion], path: &Path) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for question in questions {
        let line = serde_json::to_string(question).expect("question serializes");
        writeln!(writer, "{line}").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}
