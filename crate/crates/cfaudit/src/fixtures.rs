//! Deterministic synthetic fixtures: a small contact-center corpus, a
//! question bank, and gold labels. Used by the examples, the test suites,
//! and anyone who wants to exercise the pipeline without real transcripts.

use std::path::{Path, PathBuf};

use crate::corpus::{
    save_corpus, save_gold_labels, save_question_bank, Answer, GoldLabel, QaQuestion,
    QuestionKind, Speaker, Transcript, Turn,
};
use crate::gateway::mock::fnv1a;

const COMPANIES: [&str; 4] = ["zyntra", "acme", "novabank", "heliotel"];
const DOMAINS: [&str; 4] = ["fintech", "healthcare", "insurance", "utility"];
const FEMALE_AGENTS: [&str; 5] = ["monica", "priya", "barbara", "lucia", "mei"];
const MALE_AGENTS: [&str; 5] = ["daniel", "imran", "kenji", "carlos", "moshe"];
const CUSTOMERS: [&str; 6] = ["jordan", "casey", "riley", "morgan", "avery", "quinn"];

/// Build one synthetic transcript. The text is crafted so that turn
/// identification finds name, gender, politeness, formality, directness and
/// emotional-labor cues, mirroring what real calls expose.
pub fn sample_transcript(i: usize, seed: u64) -> Transcript {
    let mix = fnv1a(&format!("fixture-{seed}-{i}"));
    let female = i.is_multiple_of(2);
    let agent = if female {
        FEMALE_AGENTS[i % FEMALE_AGENTS.len()]
    } else {
        MALE_AGENTS[i % MALE_AGENTS.len()]
    };
    let honorific = if female { "ma'am" } else { "sir" };
    let company = COMPANIES[i % COMPANIES.len()];
    let customer = CUSTOMERS[(i / 2) % CUSTOMERS.len()];
    let order = 52300 + 17 * i as u64 + (mix % 13);
    let digits = 1000 + (mix % 9000);

    let mut texts: Vec<(Speaker, String)> = vec![
        (
            Speaker::Agent,
            format!("hello this is {agent} from {company} support how can i help you today"),
        ),
        (
            Speaker::Customer,
            format!("hi this is {customer} i am calling about order {order} it was charged twice"),
        ),
        (
            Speaker::Agent,
            "i am sorry to hear about the double charge i understand how frustrating that must be"
                .to_string(),
        ),
        (
            Speaker::Agent,
            "could you please confirm the last four digits of the card on file".to_string(),
        ),
        (
            Speaker::Customer,
            format!("sure {honorific} it is {digits}"),
        ),
        (
            Speaker::Agent,
            format!("thank you for confirming i can see the duplicate charge on order {order}"),
        ),
        (
            Speaker::Agent,
            "you must allow two business days for the refund to post back to your card".to_string(),
        ),
        (
            Speaker::Customer,
            format!("okay thank you so much {honorific}"),
        ),
        (
            Speaker::Agent,
            "i apologize for the inconvenience caused by this billing error".to_string(),
        ),
        (
            Speaker::Agent,
            "is there anything else i can help you with today".to_string(),
        ),
        (Speaker::Customer, "no that is everything".to_string()),
        (
            Speaker::Agent,
            format!("thank you for calling {company} support have a great day"),
        ),
    ];
    if i.is_multiple_of(3) {
        texts.insert(
            10,
            (
                Speaker::Customer,
                "actually one more question does the refund show on my statement right away"
                    .to_string(),
            ),
        );
        texts.insert(
            11,
            (
                Speaker::Agent,
                "i would be glad to help with that as well it appears within one statement cycle"
                    .to_string(),
            ),
        );
    }

    let turns = texts
        .into_iter()
        .enumerate()
        .map(|(pos, (speaker, text))| Turn::new(pos as u32 + 1, speaker, text))
        .collect();
    let mut transcript = Transcript::new(format!("t{:04}", i + 1), turns);
    transcript.domain_tag = Some(DOMAINS[i % DOMAINS.len()].to_string());
    transcript
}

/// A deterministic corpus of `n` synthetic transcripts.
pub fn sample_corpus(n: usize, seed: u64) -> Vec<Transcript> {
    (0..n).map(|i| sample_transcript(i, seed)).collect()
}

/// Six rubric questions spanning objective and subjective kinds.
pub fn sample_questions() -> Vec<QaQuestion> {
    vec![
        QaQuestion {
            question_id: "q_greeting".into(),
            category: "Call Opening".into(),
            text: "Did the agent greet the customer and identify themselves at the start of the call?".into(),
            variants: vec![
                "Did the agent open the call with a greeting and a self-introduction?".into(),
            ],
            sub_criteria: vec![
                "Focus on the first two agent turns.".into(),
                "A company name plus an agent name counts as identification.".into(),
            ],
            kind: QuestionKind::Objective,
        },
        QaQuestion {
            question_id: "q_resolution".into(),
            category: "Issue Resolution".into(),
            text: "Did the agent resolve the issue for the customer?".into(),
            variants: vec![
                "Was the customer's issue resolved by the agent?".into(),
                "Did the agent provide a resolution to the customer's issue?".into(),
            ],
            sub_criteria: vec![
                "The agent provides a resolution or full clarification by the end of the call.".into(),
                "The customer acknowledges the resolution before the call ends.".into(),
            ],
            kind: QuestionKind::Objective,
        },
        QaQuestion {
            question_id: "q_listening".into(),
            category: "Active Listening".into(),
            text: "Did the agent demonstrate active listening by confirming understanding and responding to the customer's concerns?".into(),
            variants: vec![
                "Did the agent acknowledge and address the customer's questions and concerns?".into(),
            ],
            sub_criteria: vec![
                "The agent acknowledges the customer's issue.".into(),
                "The agent confirms understanding before acting.".into(),
            ],
            kind: QuestionKind::Subjective,
        },
        QaQuestion {
            question_id: "q_experience".into(),
            category: "Customer Experience".into(),
            text: "Did the customer have a positive experience with the agent during the call?".into(),
            variants: vec![
                "Was the customer's overall experience with the agent positive, independent of issue resolution?".into(),
            ],
            sub_criteria: vec![
                "Answer yes for a positive or neutral close with no sign of dissatisfaction.".into(),
                "Answer no for clear frustration or rejection of the outcome.".into(),
            ],
            kind: QuestionKind::Subjective,
        },
        QaQuestion {
            question_id: "q_avoidance".into(),
            category: "Work Avoidance".into(),
            text: "Did the agent avoid assisting the customer?".into(),
            variants: vec!["Did the agent fail to help the customer?".into()],
            sub_criteria: vec![
                "Look for dismissed inquiries or refusals to provide meaningful help.".into(),
            ],
            kind: QuestionKind::Subjective,
        },
        QaQuestion {
            question_id: "q_tone".into(),
            category: "Professional Tone".into(),
            text: "Did the agent maintain a calm and professional tone throughout the interaction?".into(),
            variants: vec![
                "Did the agent stay calm and professional for the whole call?".into(),
            ],
            sub_criteria: vec![
                "Staying calm while the customer is frustrated is acceptable.".into(),
            ],
            kind: QuestionKind::Subjective,
        },
    ]
}

/// Deterministic gold labels for every (transcript, question) pair.
pub fn sample_gold_labels(corpus: &[Transcript], questions: &[QaQuestion]) -> Vec<GoldLabel> {
    let mut labels = Vec::new();
    for transcript in corpus {
        for question in questions {
            let hash = fnv1a(&format!("gold|{}|{}", transcript.id, question.question_id));
            let answer = if hash.is_multiple_of(3) { Answer::No } else { Answer::Yes };
            labels.push(GoldLabel {
                transcript_id: transcript.id.clone(),
                question_id: question.question_id.clone(),
                answer,
            });
        }
    }
    labels
}

/// Paths of a written fixture workspace.
#[derive(Debug, Clone)]
pub struct FixturePaths {
    pub corpus: PathBuf,
    pub questions: PathBuf,
    pub gold_labels: PathBuf,
}

/// Write corpus, question bank, and gold labels under `dir`.
pub fn write_fixture_workspace(
    dir: &Path,
    n: usize,
    seed: u64,
) -> Result<FixturePaths, crate::corpus::CorpusError> {
    std::fs::create_dir_all(dir).ok();
    let corpus = sample_corpus(n, seed);
    let questions = sample_questions();
    let gold = sample_gold_labels(&corpus, &questions);
    let paths = FixturePaths {
        corpus: dir.join("corpus.jsonl"),
        questions: dir.join("questions.jsonl"),
        gold_labels: dir.join("gold_labels.csv"),
    };
    save_corpus(&corpus, &paths.corpus)?;
    save_question_bank(&questions, &paths.questions)?;
    save_gold_labels(&gold, &paths.gold_labels)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_corpus_is_valid_and_deterministic() {
        let a = sample_corpus(20, 7);
        let b = sample_corpus(20, 7);
        assert_eq!(a, b);
        for t in &a {
            t.validate().unwrap();
        }
        let other_seed = sample_corpus(20, 8);
        assert_ne!(a, other_seed);
    }

    #[test]
    fn fixture_workspace_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let paths = write_fixture_workspace(dir.path(), 4, 1).unwrap();
        let corpus = crate::corpus::load_corpus(&paths.corpus).unwrap();
        assert_eq!(corpus.len(), 4);
        let questions = crate::corpus::load_question_bank(&paths.questions).unwrap();
        assert_eq!(questions.len(), 6);
        let gold = crate::corpus::load_gold_labels(&paths.gold_labels).unwrap();
        assert_eq!(gold.len(), 24);
    }
}
